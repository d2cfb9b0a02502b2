#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "qsim/molecule.hpp"
#include "qsim/operators.hpp"
#include "qsim/random_unitary.hpp"
#include "qsim/rng.hpp"

using qsim::cplx;
using qsim::DesignParams;
using qsim::Matrix;
using qsim::MoleculeSpec;
using qsim::SchemeKind;
using qsim::SchemeSpec;
using qsim::UnitaryEnsemble;

namespace {

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

MoleculeSpec random_molecule(qsim::rng::Stream& rng, int n_spins, bool with_shifts) {
  MoleculeSpec m;
  m.n_spins = n_spins;
  for (int i = 0; i < n_spins; ++i)
    m.larmor_hz.push_back(with_shifts ? (2 * rng.uniform() - 1) * 20000.0 : 0.0);
  m.j_hz = Eigen::MatrixXd::Zero(n_spins, n_spins);
  for (int i = 0; i < n_spins; ++i)
    for (int k = i + 1; k < n_spins; ++k)
      m.j_hz(i, k) = m.j_hz(k, i) = 10.0 + 90.0 * rng.uniform();
  return m;
}

// natural zero-shift evolution for 2*seg_s with a pi_x pulse on spin i at
// lams(i)*seg_s and a closing pi_x on every spin; the reference realization
// the effective Z-basis Hamiltonian is supposed to compress
Matrix piecewise_refocused(const MoleculeSpec& m, const Eigen::VectorXd& lams, double seg_s) {
  const Matrix h = qsim::nmr_hamiltonian(m);
  struct Ev {
    double t;
    int site;
  };
  std::vector<Ev> evs;
  for (int i = 0; i < m.n_spins; ++i) evs.push_back({lams(i) * seg_s, i + 1});
  std::sort(evs.begin(), evs.end(), [](const Ev& a, const Ev& b) { return a.t < b.t; });
  Matrix u = Matrix::Identity(h.rows(), h.cols());
  double now = 0;
  for (const Ev& e : evs) {
    u = qsim::expm_hermitian(h, e.t - now) * u;
    u = qsim::site_pauli('X', e.site, m.n_spins) * u;
    now = e.t;
  }
  u = qsim::expm_hermitian(h, 2 * seg_s - now) * u;
  for (int i = 1; i <= m.n_spins; ++i) u = qsim::site_pauli('X', i, m.n_spins) * u;
  return u;
}

// two-sample Kolmogorov-Smirnov p value (asymptotic), sorted copies inside
double ks_p_value(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double d = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double en = std::sqrt(na * nb / (na + nb));
  const double lam = (en + 0.12 + 0.11 / en) * d;
  double p = 0;
  for (int k = 1; k <= 100; ++k)
    p += 2.0 * (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

TEST_CASE("haar samples are unitary, reproducible and stream-separated") {
  qsim::rng::Stream s1(42, 0), s1_again(42, 0), s2(42, 1);
  const Matrix a = qsim::sample_haar(16, s1);
  const Matrix b = qsim::sample_haar(16, s1_again);
  const Matrix c = qsim::sample_haar(16, s2);
  CHECK(qsim::is_unitary(a));
  CHECK(max_abs_diff(a, b) == 0.0);
  CHECK(max_abs_diff(a, c) > 1e-3);

  qsim::rng::Stream s3(42, 7);
  const Matrix phase = qsim::sample_haar(1, s3);
  CHECK(std::abs(std::abs(phase(0, 0)) - 1.0) < 1e-12);

  CHECK_THROWS_AS(qsim::sample_haar(0, s3), std::invalid_argument);
}

TEST_CASE("haar first-column weight matches the uniform sphere") {
  const int n_samples = 2000;
  double acc = 0;
  for (int i = 0; i < n_samples; ++i) {
    qsim::rng::Stream s(777, static_cast<std::uint64_t>(i));
    const Matrix u = qsim::sample_haar(2, s);
    acc += std::norm(u(0, 0));
  }
  // |u00|^2 is uniform on [0,1] for d=2, so the mean sits near 1/2 with
  // standard error sqrt(1/12/N) ~ 0.0065; allow five of those
  CHECK(std::abs(acc / n_samples - 0.5) < 0.033);
}

TEST_CASE("local product samples factorize site by site") {
  qsim::rng::Stream s(5, 3);
  const Matrix u = qsim::sample_local_product(2, SchemeKind::LocalHaar, s);
  REQUIRE(u.rows() == 4);
  CHECK(qsim::is_unitary(u));

  // realign u(2i+k, 2j+l) as M(2i+j, 2k+l); a product a (x) b has rank 1 there
  Matrix m(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) m(2 * i + j, 2 * k + l) = u(2 * i + k, 2 * j + l);
  Eigen::JacobiSVD<Matrix> svd(m);
  CHECK(svd.singularValues()(1) < 1e-10 * svd.singularValues()(0));

  CHECK_THROWS_AS(qsim::sample_local_product(2, SchemeKind::GlobalHaar, s),
                  std::invalid_argument);
}

TEST_CASE("axis-angle ensemble is special-unitary with a heavier trace moment") {
  const int n_samples = 4000;
  double m_axis = 0, m_haar = 0;
  for (int i = 0; i < n_samples; ++i) {
    qsim::rng::Stream sa(99, static_cast<std::uint64_t>(i));
    const Matrix u = qsim::sample_local_product(1, SchemeKind::LocalAxisAngle, sa);
    if (i < 50) {
      CHECK(qsim::is_unitary(u));
      CHECK(std::abs(u.determinant() - cplx(1, 0)) < 1e-12);  // SU(2), unlike Haar on U(2)
    }
    m_axis += std::norm(u.trace());
    qsim::rng::Stream sh(98, static_cast<std::uint64_t>(i));
    m_haar += std::norm(qsim::sample_local_product(1, SchemeKind::LocalHaar, sh).trace());
  }
  m_axis /= n_samples;
  m_haar /= n_samples;
  // E|tr u|^2 is 2 for a uniform rotation angle but 1 for the Haar measure;
  // both standard errors are ~0.02 here, so the gap is unmistakable
  CHECK(std::abs(m_axis - 2.0) < 0.12);
  CHECK(std::abs(m_haar - 1.0) < 0.12);
}

TEST_CASE("refocusing schedules fill the unit box row by row") {
  DesignParams d;
  d.molecule = qsim::crotonic_default();
  qsim::rng::Stream s(31, 0);
  const qsim::RefocusSchedule sched = qsim::sample_schedule(d, s);
  REQUIRE(sched.lambdas.rows() == d.n_segments);
  REQUIRE(sched.lambdas.cols() == 4);
  for (int r = 0; r < sched.lambdas.rows(); ++r)
    for (int c = 0; c < sched.lambdas.cols(); ++c) {
      CHECK(sched.lambdas(r, c) >= 0.0);
      CHECK(sched.lambdas(r, c) < 1.0);
    }

  DesignParams odd = d;
  odd.n_segments = 3;
  CHECK_THROWS_AS(qsim::validate(odd), std::invalid_argument);
  DesignParams neg = d;
  neg.period_ms = -1.0;
  CHECK_THROWS_AS(qsim::validate(neg), std::invalid_argument);
}

TEST_CASE("effective hamiltonian coefficients match hand arithmetic") {
  MoleculeSpec m;
  m.n_spins = 2;
  m.larmor_hz = {120.0, -45.0};
  m.j_hz = Eigen::MatrixXd::Zero(2, 2);
  m.j_hz(0, 1) = m.j_hz(1, 0) = 33.0;

  Eigen::VectorXd lams(2);
  lams << 0.2, 0.7;
  const Matrix h = qsim::effective_hamiltonian(lams, 'Z', m);
  CHECK(h.cwiseAbs().sum() == doctest::Approx(h.diagonal().cwiseAbs().sum()));

  const double pi = std::numbers::pi;
  const double w1 = (1 - 2 * 0.2) * 2 * pi * 120.0;
  const double w2 = (1 - 2 * 0.7) * 2 * pi * (-45.0);
  const double jeff = pi * (1 - 0.5) * 33.0;
  CHECK(h(0, 0).real() == doctest::Approx(-w1 - w2 + jeff));
  CHECK(h(1, 1).real() == doctest::Approx(-w1 + w2 - jeff));
  CHECK(h(2, 2).real() == doctest::Approx(w1 - w2 - jeff));
  CHECK(h(3, 3).real() == doctest::Approx(w1 + w2 + jeff));

  // the half point silences the shift line and leaves the couplings whole
  Eigen::VectorXd half(2);
  half << 0.5, 0.5;
  const Matrix hh = qsim::effective_hamiltonian(half, 'Z', m);
  CHECK(hh(0, 0).real() == doctest::Approx(pi * 33.0));
  CHECK(hh(1, 1).real() == doctest::Approx(-pi * 33.0));

  Eigen::VectorXd out_of_range(2);
  out_of_range << 0.5, 1.0;
  CHECK_THROWS_AS(qsim::effective_hamiltonian(out_of_range, 'Z', m), std::invalid_argument);
  CHECK_THROWS_AS(qsim::effective_hamiltonian(lams, 'Q', m), std::invalid_argument);
}

TEST_CASE("x-basis effective hamiltonian is the rotated z-basis one") {
  qsim::rng::Stream rng(61, 0);
  const MoleculeSpec m = random_molecule(rng, 3, true);
  Eigen::VectorXd lams(3);
  lams << rng.uniform(), rng.uniform(), rng.uniform();

  const Matrix hz = qsim::effective_hamiltonian(lams, 'Z', m);
  const Matrix hx = qsim::effective_hamiltonian(lams, 'X', m);
  Matrix r = Matrix::Identity(8, 8);
  for (int i = 1; i <= 3; ++i)
    r = qsim::expm_hermitian(qsim::site_pauli('Y', i, 3), std::numbers::pi / 4) * r;
  // entries scale with the shift frequencies, so compare relative to them
  CHECK(max_abs_diff(hx, r * hz * r.adjoint()) < 1e-13 * hz.cwiseAbs().maxCoeff());
}

TEST_CASE("pulse-conjugated evolution realizes the effective couplings") {
  // zero shifts: the pulse placement encodes only the coupling rescaling
  qsim::rng::Stream rng(71, 0);
  const MoleculeSpec m = random_molecule(rng, 4, false);
  const double seg_s = 0.004;
  double worst = 0;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd lams(4);
    for (int i = 0; i < 4; ++i) lams(i) = rng.uniform();
    const Matrix direct = qsim::expm_hermitian(qsim::effective_hamiltonian(lams, 'Z', m), seg_s);
    const Matrix pieced = piecewise_refocused(m, lams, seg_s);
    worst = std::max(worst, max_abs_diff(direct, pieced));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("design unitary basics: zero period, unitarity, segment count") {
  DesignParams d;
  d.molecule = qsim::crotonic_default();
  d.period_ms = 0.0;
  qsim::rng::Stream s(81, 0);
  const Matrix frozen = qsim::design_unitary(d, qsim::sample_schedule(d, s));
  CHECK(max_abs_diff(frozen, Matrix::Identity(16, 16)) < 1e-12);

  d.period_ms = 20.0;
  qsim::rng::Stream s2(81, 1);
  const Matrix u = qsim::sample_design_unitary(d, s2);
  CHECK(qsim::is_unitary(u));

  qsim::RefocusSchedule wrong;
  wrong.lambdas = Eigen::MatrixXd::Zero(3, 4);
  CHECK_THROWS_AS(qsim::design_unitary(d, wrong), std::invalid_argument);
}

TEST_CASE("frame potential closed forms") {
  qsim::rng::Stream s(91, 0);
  UnitaryEnsemble one;
  one.dim = 16;
  one.members.push_back(qsim::sample_haar(16, s));
  // a singleton only has its self pair: |Tr(u^dag u)|^2 / 1 = d^2
  CHECK(qsim::frame_potential(one, 1, true) == doctest::Approx(256.0));
  CHECK(qsim::frame_potential(one, 2, true) == doctest::Approx(65536.0));
  CHECK_THROWS_AS(qsim::frame_potential(one, 1, false), std::invalid_argument);
  CHECK_THROWS_AS(qsim::frame_potential(one, 3, true), std::invalid_argument);

  UnitaryEnsemble pair;
  pair.dim = 4;
  pair.members.push_back(Matrix::Identity(4, 4));
  pair.members.push_back(qsim::kron(qsim::pauli('X'), qsim::pauli('I')));
  // orthogonal pair: cross traces vanish, self pairs contribute d^2 each
  CHECK(qsim::frame_potential(pair, 1, true) == doctest::Approx(8.0));
  CHECK(qsim::frame_potential(pair, 1, false) == doctest::Approx(0.0));

  // the self-pair floor d^{2k}/M binds any ensemble from below
  UnitaryEnsemble few;
  few.dim = 4;
  for (int i = 0; i < 5; ++i) {
    qsim::rng::Stream si(92, static_cast<std::uint64_t>(i));
    few.members.push_back(qsim::sample_haar(4, si));
  }
  CHECK(qsim::frame_potential(few, 1, true) >= 16.0 / 5 - 1e-12);
  CHECK(qsim::frame_potential(few, 2, true) >= 256.0 / 5 - 1e-12);
}

TEST_CASE("haar ensembles sit near the moment targets, relabel-invariantly") {
  SchemeSpec scheme;
  scheme.kind = SchemeKind::GlobalHaar;
  scheme.n_spins = 2;
  const UnitaryEnsemble ens = qsim::sample_ensemble(scheme, 120, 1234, 4);
  const double f1 = qsim::frame_potential(ens, 1, false);
  const double f2 = qsim::frame_potential(ens, 2, false);
  CHECK(f1 > 0.7);
  CHECK(f1 < 1.3);
  CHECK(f2 > 1.3);
  CHECK(f2 < 2.9);

  UnitaryEnsemble reversed = ens;
  std::reverse(reversed.members.begin(), reversed.members.end());
  CHECK(std::abs(qsim::frame_potential(reversed, 1, false) - f1) < 1e-9);
  CHECK(std::abs(qsim::frame_potential(reversed, 2, false) - f2) < 1e-9);
}

TEST_CASE("trace distribution is invariant under a fixed left rotation") {
  const int n = 300;
  qsim::rng::Stream sv(2024, 999999);
  const Matrix v = qsim::sample_haar(4, sv);
  std::vector<double> plain, rotated;
  for (int i = 0; i < n; ++i) {
    qsim::rng::Stream sa(2024, static_cast<std::uint64_t>(i));
    plain.push_back(std::norm(qsim::sample_haar(4, sa).trace()));
    qsim::rng::Stream sb(2025, static_cast<std::uint64_t>(i));
    rotated.push_back(std::norm((v * qsim::sample_haar(4, sb)).trace()));
  }
  // fresh draws on both sides; left invariance says the laws coincide
  CHECK(ks_p_value(plain, rotated) > 0.01);
}

TEST_CASE("ensemble sampling is worker-count independent and size-checked") {
  SchemeSpec scheme;
  scheme.kind = SchemeKind::DesignHamiltonian;
  scheme.n_spins = 4;
  scheme.design.molecule = qsim::crotonic_default();
  const UnitaryEnsemble a = qsim::sample_ensemble(scheme, 12, 55, 1);
  const UnitaryEnsemble b = qsim::sample_ensemble(scheme, 12, 55, 8);
  REQUIRE(a.members.size() == b.members.size());
  for (std::size_t i = 0; i < a.members.size(); ++i)
    CHECK(max_abs_diff(a.members[i], b.members[i]) == 0.0);

  CHECK_THROWS_AS(qsim::sample_ensemble(scheme, 0, 55, 1), std::invalid_argument);
}

TEST_CASE("ensembles round-trip through the text format exactly") {
  SchemeSpec scheme;
  scheme.kind = SchemeKind::GlobalHaar;
  scheme.n_spins = 2;
  const UnitaryEnsemble ens = qsim::sample_ensemble(scheme, 3, 77, 1);
  const std::string path = "/tmp/qsim_test_ensemble.txt";
  qsim::save_ensemble(path, ens);
  const UnitaryEnsemble back = qsim::load_ensemble(path);
  CHECK(back.dim == ens.dim);
  CHECK(back.seed == ens.seed);
  CHECK(back.provenance == ens.provenance);
  REQUIRE(back.members.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(max_abs_diff(back.members[i], ens.members[i]) == 0.0);

  // a truncated copy must be rejected, not silently zero-padded
  {
    std::FILE* in = std::fopen(path.c_str(), "rb");
    std::fseek(in, 0, SEEK_END);
    const long size = std::ftell(in);
    std::fseek(in, 0, SEEK_SET);
    std::string body(static_cast<std::size_t>(size), '\0');
    REQUIRE(std::fread(body.data(), 1, body.size(), in) == body.size());
    std::fclose(in);
    std::FILE* out = std::fopen("/tmp/qsim_test_ensemble_cut.txt", "wb");
    std::fwrite(body.data(), 1, body.size() / 2, out);
    std::fclose(out);
  }
  CHECK_THROWS_AS(qsim::load_ensemble("/tmp/qsim_test_ensemble_cut.txt"),
                  std::invalid_argument);
  CHECK_THROWS_AS(qsim::load_ensemble("/tmp/qsim_test_ensemble_missing.txt"),
                  std::invalid_argument);
}

TEST_CASE("frame potential time trace starts at the identity plateau") {
  DesignParams d;
  d.molecule = qsim::crotonic_default();
  const std::vector<double> times = {0.0, 5.0, 10.0, 20.0, 40.0};
  const auto rows = qsim::frame_potential_trace(d, times, 20, 4321, 4);
  REQUIRE(rows.size() == times.size());
  // at t=0 every member is the identity, so the pair estimator sits at d^2
  CHECK(rows[0].f1 == doctest::Approx(256.0));
  CHECK(rows[0].f2 == doctest::Approx(65536.0));
  // by the end of the two-round sequence the ensemble has scrambled
  CHECK(rows.back().f1 < 30.0);

  const auto again = qsim::frame_potential_trace(d, times, 20, 4321, 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].f1 == again[i].f1);
    CHECK(rows[i].f2 == again[i].f2);
  }

  CHECK_THROWS_AS(qsim::frame_potential_trace(d, {5.0, 1.0}, 20, 1, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(qsim::frame_potential_trace(d, times, 1, 1, 1), std::invalid_argument);
}

TEST_CASE("scheme names round-trip through the parser") {
  for (SchemeKind k : {SchemeKind::GlobalHaar, SchemeKind::LocalHaar,
                       SchemeKind::LocalAxisAngle, SchemeKind::DesignHamiltonian})
    CHECK(qsim::parse_scheme(qsim::scheme_name(k)) == k);
  CHECK_THROWS_AS(qsim::parse_scheme("haar"), std::invalid_argument);
}
