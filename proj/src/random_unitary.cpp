#include "qsim/random_unitary.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qsim/operators.hpp"
#include "qsim/parallel.hpp"

namespace qsim {

SchemeKind parse_scheme(const std::string& name) {
  if (name == "GlobalHaar") return SchemeKind::GlobalHaar;
  if (name == "LocalHaar") return SchemeKind::LocalHaar;
  if (name == "LocalAxisAngle") return SchemeKind::LocalAxisAngle;
  if (name == "DesignHamiltonian") return SchemeKind::DesignHamiltonian;
  throw std::invalid_argument("unknown randomization scheme '" + name + "'");
}

std::string scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::GlobalHaar: return "GlobalHaar";
    case SchemeKind::LocalHaar: return "LocalHaar";
    case SchemeKind::LocalAxisAngle: return "LocalAxisAngle";
    case SchemeKind::DesignHamiltonian: return "DesignHamiltonian";
  }
  throw std::logic_error("unreachable scheme kind");
}

void validate(const DesignParams& d) {
  if (d.period_ms < 0) throw std::invalid_argument("design period must be non-negative");
  if (d.n_segments < 2 || d.n_segments % 2 != 0)
    throw std::invalid_argument("design sequence needs an even number of segments");
  validate(d.molecule);
}

Matrix sample_haar(int dim, rng::Stream& rng) {
  if (dim < 1) throw std::invalid_argument("Haar sampling needs dim >= 1");
  Matrix g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double re = rng.gaussian();
      const double im = rng.gaussian();
      g(i, j) = cplx(re, im) / std::numbers::sqrt2;
    }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const cplx rjj = r(j, j);
    const double a = std::abs(rjj);
    // a == 0 has probability zero; keep the column unchanged if it happens
    if (a > 0) q.col(j) *= rjj / a;
  }
  return q;
}

namespace {

Matrix sample_axis_angle_qubit(rng::Stream& rng) {
  // uniform direction via normalized Gaussian triple, uniform angle
  double nx = rng.gaussian(), ny = rng.gaussian(), nz = rng.gaussian();
  const double norm = std::sqrt(nx * nx + ny * ny + nz * nz);
  if (norm > 0) {
    nx /= norm;
    ny /= norm;
    nz /= norm;
  } else {
    nx = 1;  // probability-zero fallback
    ny = nz = 0;
  }
  const double theta = 2.0 * std::numbers::pi * rng.uniform();
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  Matrix u(2, 2);
  u(0, 0) = cplx(c, -s * nz);
  u(0, 1) = cplx(-s * ny, -s * nx);
  u(1, 0) = cplx(s * ny, -s * nx);
  u(1, 1) = cplx(c, s * nz);
  return u;
}

}  // namespace

Matrix sample_local_product(int n_spins, SchemeKind mode, rng::Stream& rng) {
  if (n_spins < 1) throw std::invalid_argument("local product needs at least one spin");
  if (mode != SchemeKind::LocalHaar && mode != SchemeKind::LocalAxisAngle)
    throw std::invalid_argument("local product mode must be LocalHaar or LocalAxisAngle");
  Matrix out = Matrix::Identity(1, 1);
  for (int i = 0; i < n_spins; ++i) {
    const Matrix u =
        mode == SchemeKind::LocalHaar ? sample_haar(2, rng) : sample_axis_angle_qubit(rng);
    out = kron(out, u);
  }
  return out;
}

RefocusSchedule sample_schedule(const DesignParams& d, rng::Stream& rng) {
  validate(d);
  RefocusSchedule s;
  s.lambdas.resize(d.n_segments, d.molecule.n_spins);
  for (int m = 0; m < d.n_segments; ++m)
    for (int i = 0; i < d.molecule.n_spins; ++i) s.lambdas(m, i) = rng.uniform();
  return s;
}

Matrix effective_hamiltonian(const Eigen::VectorXd& lams, char basis, const MoleculeSpec& m) {
  validate(m);
  if (lams.size() != m.n_spins)
    throw std::invalid_argument("schedule row length does not match the molecule");
  if (basis != 'Z' && basis != 'X') throw std::invalid_argument("basis must be 'Z' or 'X'");
  for (Eigen::Index i = 0; i < lams.size(); ++i)
    if (lams(i) < 0.0 || lams(i) >= 1.0)
      throw std::invalid_argument("pulse-time fractions must lie in [0,1)");

  const Eigen::Index dim = Eigen::Index{1} << m.n_spins;
  Matrix h = Matrix::Zero(dim, dim);
  for (int i = 1; i <= m.n_spins; ++i) {
    const double w = 2.0 * std::numbers::pi * m.larmor_hz[static_cast<std::size_t>(i - 1)];
    h += -(1.0 - 2.0 * lams(i - 1)) * w * site_pauli(basis, i, m.n_spins);
  }
  for (int i = 1; i <= m.n_spins; ++i)
    for (int k = i + 1; k <= m.n_spins; ++k) {
      const double j_eff = (1.0 - std::abs(lams(i - 1) - lams(k - 1))) * m.j_hz(i - 1, k - 1);
      h += std::numbers::pi * j_eff * (site_pauli(basis, i, m.n_spins) * site_pauli(basis, k, m.n_spins));
    }
  return h;
}

Matrix design_unitary(const DesignParams& d, const RefocusSchedule& sched) {
  validate(d);
  if (sched.lambdas.rows() != d.n_segments || sched.lambdas.cols() != d.molecule.n_spins)
    throw std::invalid_argument("schedule shape does not match the design parameters");
  const double seg_s = 0.5 * d.period_ms * 1e-3;
  const Eigen::Index dim = Eigen::Index{1} << d.molecule.n_spins;
  Matrix u = Matrix::Identity(dim, dim);
  for (int m = 0; m < d.n_segments; ++m) {
    const char basis = (m % 2 == 0) ? 'Z' : 'X';
    const Matrix h = effective_hamiltonian(sched.lambdas.row(m), basis, d.molecule);
    u = expm_hermitian(h, seg_s) * u;
  }
  return u;
}

Matrix sample_design_unitary(const DesignParams& d, rng::Stream& rng) {
  return design_unitary(d, sample_schedule(d, rng));
}

Matrix sample_unitary(const SchemeSpec& scheme, rng::Stream& rng) {
  switch (scheme.kind) {
    case SchemeKind::GlobalHaar:
      return sample_haar(1 << scheme.n_spins, rng);
    case SchemeKind::LocalHaar:
    case SchemeKind::LocalAxisAngle:
      return sample_local_product(scheme.n_spins, scheme.kind, rng);
    case SchemeKind::DesignHamiltonian:
      if (scheme.design.molecule.n_spins != scheme.n_spins)
        throw std::invalid_argument("design molecule size does not match the register");
      return sample_design_unitary(scheme.design, rng);
  }
  throw std::logic_error("unreachable scheme kind");
}

UnitaryEnsemble sample_ensemble(const SchemeSpec& scheme, int count, std::uint64_t seed,
                                int workers) {
  if (count < 1) throw std::invalid_argument("ensemble needs at least one member");
  UnitaryEnsemble ens;
  ens.dim = 1 << scheme.n_spins;
  ens.seed = seed;
  ens.provenance = scheme_name(scheme.kind) + " n_spins=" + std::to_string(scheme.n_spins);
  if (scheme.kind == SchemeKind::DesignHamiltonian) {
    std::ostringstream os;
    os << " period_ms=" << scheme.design.period_ms << " segments=" << scheme.design.n_segments;
    ens.provenance += os.str();
  }
  ens.members.resize(static_cast<std::size_t>(count));
  parallel_for(static_cast<std::size_t>(count), workers, [&](std::size_t i) {
    rng::Stream stream(seed, i);
    ens.members[i] = sample_unitary(scheme, stream);
    if (!is_unitary(ens.members[i], tol_unitary))
      throw std::runtime_error("sampled ensemble member failed the unitarity check");
  });
  return ens;
}

namespace {

// |Tr(a^dag b)| via the Frobenius inner product; avoids forming the product
double abs_trace_pair(const Matrix& a, const Matrix& b) {
  return std::abs((a.conjugate().cwiseProduct(b)).sum());
}

// frame potentials for both k=1,2 from one pass over the pair traces
void frame_potential_pair(const std::vector<Matrix>& members, int dim, int workers,
                          bool include_self, double* f1, double* f2) {
  const std::size_t m = members.size();
  const std::size_t min_members = include_self ? 1 : 2;
  if (m < min_members) throw std::invalid_argument("ensemble too small for this frame potential");

  const std::size_t n_pairs = m * (m - 1) / 2;
  std::vector<double> t2(n_pairs), t4(n_pairs);
  parallel_for(n_pairs, workers, [&](std::size_t p) {
    // unrank p -> (i, j), i < j, ordered by i then j
    std::size_t i = 0, acc = 0;
    while (acc + (m - 1 - i) <= p) {
      acc += m - 1 - i;
      ++i;
    }
    const std::size_t j = i + 1 + (p - acc);
    const double t = abs_trace_pair(members[i], members[j]);
    t2[p] = t * t;
    t4[p] = t2[p] * t2[p];
  });

  // off-diagonal pairs count twice (u,v) and (v,u); diagonal adds dim^{2k}
  double s1 = 2.0 * kahan_sum(t2);
  double s2 = 2.0 * kahan_sum(t4);
  const double md = static_cast<double>(m);
  if (include_self) {
    const double d2 = static_cast<double>(dim) * dim;
    s1 += md * d2;
    s2 += md * d2 * d2;
    *f1 = s1 / (md * md);
    *f2 = s2 / (md * md);
  } else {
    *f1 = s1 / (md * (md - 1));
    *f2 = s2 / (md * (md - 1));
  }
}

}  // namespace

double frame_potential(const UnitaryEnsemble& ens, int k, bool include_self) {
  if (k != 1 && k != 2) throw std::invalid_argument("frame potential implemented for k in {1,2}");
  if (ens.members.empty()) throw std::invalid_argument("frame potential of an empty ensemble");
  double f1 = 0, f2 = 0;
  frame_potential_pair(ens.members, ens.dim, 1, include_self, &f1, &f2);
  return k == 1 ? f1 : f2;
}

std::vector<FramePotentialRow> frame_potential_trace(const DesignParams& d,
                                                     const std::vector<double>& times_ms,
                                                     int n_samples, std::uint64_t seed,
                                                     int workers) {
  validate(d);
  if (n_samples < 2) throw std::invalid_argument("time trace needs at least 2 samples");
  for (std::size_t i = 1; i < times_ms.size(); ++i)
    if (times_ms[i] < times_ms[i - 1])
      throw std::invalid_argument("trace times must be sorted ascending");

  const int n_spins = d.molecule.n_spins;
  const Eigen::Index dim = Eigen::Index{1} << n_spins;
  const double seg_ms = 0.5 * d.period_ms;

  // cache the eigensystem of every segment Hamiltonian once per sample
  struct Segment {
    Eigen::VectorXd evals;
    Matrix evecs;
  };
  std::vector<std::vector<Segment>> segs(static_cast<std::size_t>(n_samples));
  parallel_for(static_cast<std::size_t>(n_samples), workers, [&](std::size_t i) {
    rng::Stream stream(seed, i);
    const RefocusSchedule sched = sample_schedule(d, stream);
    auto& mine = segs[i];
    mine.resize(static_cast<std::size_t>(d.n_segments));
    for (int m = 0; m < d.n_segments; ++m) {
      const char basis = (m % 2 == 0) ? 'Z' : 'X';
      const Matrix h = effective_hamiltonian(sched.lambdas.row(m), basis, d.molecule);
      Eigen::SelfAdjointEigenSolver<Matrix> es(h);
      mine[static_cast<std::size_t>(m)] = {es.eigenvalues(), es.eigenvectors()};
    }
  });

  auto truncated = [&](std::size_t sample, double t_ms) {
    Matrix u = Matrix::Identity(dim, dim);
    double remaining = std::min(t_ms, seg_ms * d.n_segments);
    for (int m = 0; m < d.n_segments && remaining > 0; ++m) {
      const double dt_s = std::min(seg_ms, remaining) * 1e-3;
      const auto& sg = segs[sample][static_cast<std::size_t>(m)];
      Vector phases(sg.evals.size());
      for (Eigen::Index q = 0; q < sg.evals.size(); ++q)
        phases(q) = std::exp(cplx(0, -sg.evals(q) * dt_s));
      u = sg.evecs * phases.asDiagonal() * sg.evecs.adjoint() * u;
      remaining -= seg_ms;
    }
    return u;
  };

  std::vector<FramePotentialRow> rows(times_ms.size());
  for (std::size_t ti = 0; ti < times_ms.size(); ++ti) {
    std::vector<Matrix> members(static_cast<std::size_t>(n_samples));
    parallel_for(static_cast<std::size_t>(n_samples), workers,
                 [&](std::size_t i) { members[i] = truncated(i, times_ms[ti]); });
    double f1 = 0, f2 = 0;
    frame_potential_pair(members, static_cast<int>(dim), workers, false, &f1, &f2);
    rows[ti] = {times_ms[ti], f1, f2};
  }
  return rows;
}

void save_ensemble(const std::string& path, const UnitaryEnsemble& ens) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
  out << "qsim-ensemble v1\n";
  out << "dim " << ens.dim << "\n";
  out << "count " << ens.members.size() << "\n";
  out << "seed " << ens.seed << "\n";
  out << "scheme " << ens.provenance << "\n";
  char buf[32];
  for (std::size_t k = 0; k < ens.members.size(); ++k) {
    out << "member " << k << "\n";
    const Matrix& u = ens.members[k];
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      for (Eigen::Index j = 0; j < u.cols(); ++j) {
        if (j) out << ' ';
        std::snprintf(buf, sizeof buf, "%.17g", u(i, j).real());
        out << buf << ' ';
        std::snprintf(buf, sizeof buf, "%.17g", u(i, j).imag());
        out << buf;
      }
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

UnitaryEnsemble load_ensemble(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open ensemble file '" + path + "'");
  std::string line, word;

  auto expect_line = [&](const std::string& what) {
    if (!std::getline(in, line)) throw std::invalid_argument(path + ": truncated " + what);
    return std::istringstream(line);
  };

  {
    auto ss = expect_line("header");
    std::string magic, version;
    ss >> magic >> version;
    if (magic != "qsim-ensemble" || version != "v1")
      throw std::invalid_argument(path + ": not a qsim-ensemble v1 file");
  }

  UnitaryEnsemble ens;
  std::size_t count = 0;
  {
    auto ss = expect_line("dim header");
    ss >> word >> ens.dim;
    if (word != "dim" || ens.dim < 1) throw std::invalid_argument(path + ": bad dim header");
  }
  {
    auto ss = expect_line("count header");
    ss >> word >> count;
    if (word != "count" || count < 1) throw std::invalid_argument(path + ": bad count header");
  }
  {
    auto ss = expect_line("seed header");
    ss >> word >> ens.seed;
    if (word != "seed") throw std::invalid_argument(path + ": bad seed header");
  }
  {
    if (!std::getline(in, line) || line.rfind("scheme ", 0) != 0)
      throw std::invalid_argument(path + ": bad scheme header");
    ens.provenance = line.substr(7);
  }

  ens.members.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    auto ss = expect_line("member header");
    std::size_t idx = 0;
    ss >> word >> idx;
    if (word != "member" || idx != k)
      throw std::invalid_argument(path + ": bad member header for member " + std::to_string(k));
    Matrix u(ens.dim, ens.dim);
    for (Eigen::Index i = 0; i < ens.dim; ++i) {
      auto row = expect_line("member row");
      for (Eigen::Index j = 0; j < ens.dim; ++j) {
        double re, im;
        if (!(row >> re >> im))
          throw std::invalid_argument(path + ": short row in member " + std::to_string(k));
        u(i, j) = cplx(re, im);
      }
    }
    ens.members[k] = std::move(u);
  }
  return ens;
}

}  // namespace qsim
