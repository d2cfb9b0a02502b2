#include "qsim/otoc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qsim/operators.hpp"
#include "qsim/parallel.hpp"

namespace qsim {

namespace {

void check_site_letter(const char* what, char letter, int site, int n_spins) {
  if (letter != 'X' && letter != 'Y' && letter != 'Z')
    throw std::invalid_argument(std::string(what) + " operator letter must be X, Y or Z");
  if (site < 1 || site > n_spins)
    throw std::invalid_argument(std::string(what) + " site is outside the register");
}

}  // namespace

void validate(const OtocConfig& cfg) {
  validate(cfg.params);
  check_site_letter("W", cfg.w_pauli, cfg.w_site, cfg.params.n_spins);
  check_site_letter("V", cfg.v_pauli, cfg.v_site, cfg.params.n_spins);
  if (cfg.n_periods_max < 0) throw std::invalid_argument("n_periods_max must be non-negative");
  if (cfg.n_unitaries < 2)
    throw std::invalid_argument("the jackknife needs at least 2 sampled unitaries");
  if (cfg.scheme.n_spins != cfg.params.n_spins)
    throw std::invalid_argument("randomization scheme register size does not match the chain");
  if (!cfg.initial_state.empty()) {
    if (static_cast<int>(cfg.initial_state.size()) != cfg.params.n_spins)
      throw std::invalid_argument("initial_state length does not match the register");
    for (char c : cfg.initial_state)
      if (c != '0' && c != '1')
        throw std::invalid_argument("initial_state must be a bitstring of 0s and 1s");
  }
  if (!(cfg.modified_weight_base > 0))
    throw std::invalid_argument("modified_weight_base must be positive");
}

Vector initial_state_vector(const OtocConfig& cfg) {
  validate(cfg);
  if (cfg.initial_state.empty())
    return basis_state(std::string(static_cast<std::size_t>(cfg.params.n_spins), '0'));
  return basis_state(cfg.initial_state);
}

namespace {

struct Observables {
  Matrix w;  // W
  Matrix v;  // V
};

Observables build_observables(const OtocConfig& cfg) {
  return {site_pauli(cfg.w_pauli, cfg.w_site, cfg.params.n_spins),
          site_pauli(cfg.v_pauli, cfg.v_site, cfg.params.n_spins)};
}

double real_trace_product(const Matrix& a, const Matrix& b) {
  // Tr(ab) for Hermitian a, b is real; the Frobenius form avoids the product
  return (a.transpose().cwiseProduct(b)).sum().real();
}

}  // namespace

double exact_otoc(const OtocConfig& cfg, int n_periods) {
  validate(cfg);
  if (n_periods < 0) throw std::invalid_argument("period count must be non-negative");
  const auto [w, v] = build_observables(cfg);
  const Matrix u = evolve(cfg.params, n_periods);
  const Matrix wt = u.adjoint() * w * u;
  const double dim = static_cast<double>(wt.rows());
  const cplx tr = ((wt * v.adjoint() * wt * v).trace());
  return tr.real() / dim;
}

double exact_modified_otoc(const OtocConfig& cfg, int n_periods) {
  validate(cfg);
  if (n_periods < 0) throw std::invalid_argument("period count must be non-negative");
  const auto [w, v] = build_observables(cfg);
  const Matrix u = evolve(cfg.params, n_periods);
  const Matrix wt = u.adjoint() * w * u;
  const Matrix bt = v.adjoint() * wt * v;

  const int n = cfg.params.n_spins;
  const unsigned full = (1u << n) - 1u;
  double num = 0, dw = 0, db = 0;
  for (unsigned mask = 1; mask <= full; ++mask) {
    std::vector<int> keep;
    for (int s = 1; s <= n; ++s)
      if (mask & (1u << (s - 1))) keep.push_back(s);
    const double weight = std::pow(cfg.modified_weight_base, static_cast<int>(keep.size()));
    const Matrix wa = partial_trace(wt, keep, n);
    const Matrix ba = partial_trace(bt, keep, n);
    num += weight * real_trace_product(wa, ba);
    dw += weight * real_trace_product(wa, wa);
    db += weight * real_trace_product(ba, ba);
  }
  const double denom = std::sqrt(dw * db);
  if (!(denom > 0)) throw std::runtime_error("subset-resolved normalization vanished");
  return num / denom;
}

std::pair<double, double> sample_pair(const OtocConfig& cfg, const Matrix& u, int n_periods) {
  validate(cfg);
  if (n_periods < 0) throw std::invalid_argument("period count must be non-negative");
  const auto [w, v] = build_observables(cfg);
  if (u.rows() != w.rows() || u.cols() != w.cols())
    throw std::invalid_argument("sampled unitary has the wrong dimension");
  const Vector psi0 = initial_state_vector(cfg);
  const Matrix step = floquet_step(cfg.params);
  Vector s1 = u * psi0;
  Vector s2 = v * s1;
  for (int k = 0; k < n_periods; ++k) {
    s1 = step * s1;
    s2 = step * s2;
  }
  return {expectation(s1, w), expectation(s2, w)};
}

EstimateStat reduce_pairs(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("pair arrays differ in length");
  const std::size_t m = xs.size();
  if (m < 2) throw std::invalid_argument("the jackknife needs at least 2 samples");

  std::vector<double> xy(m), xx(m), yy(m);
  for (std::size_t i = 0; i < m; ++i) {
    xy[i] = xs[i] * ys[i];
    xx[i] = xs[i] * xs[i];
    yy[i] = ys[i] * ys[i];
  }
  const double sxy = kahan_sum(xy);
  const double sxx = kahan_sum(xx);
  const double syy = kahan_sum(yy);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double md = static_cast<double>(m);
  EstimateStat out;
  if (sxx / md < 1e-12 || syy / md < 1e-12) {
    out.estimate = nan;
    out.stderr_jk = nan;
    out.unreliable = true;
    return out;
  }
  out.estimate = sxy / std::sqrt(sxx * syy);

  std::vector<double> loo(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = sxx - xx[i];
    const double dy = syy - yy[i];
    if (!(dx > 0) || !(dy > 0)) {
      // one sample carries the whole denominator; the error bar is meaningless
      out.stderr_jk = nan;
      out.unreliable = true;
      return out;
    }
    loo[i] = (sxy - xy[i]) / std::sqrt(dx * dy);
  }
  const double loo_mean = kahan_sum(loo) / md;
  std::vector<double> dev(m);
  for (std::size_t i = 0; i < m; ++i) dev[i] = (loo[i] - loo_mean) * (loo[i] - loo_mean);
  out.stderr_jk = std::sqrt((md - 1.0) / md * kahan_sum(dev));
  return out;
}

OtocSeries exact_series(const OtocConfig& cfg) {
  validate(cfg);
  OtocSeries rows;
  const double period = cfg.params.jt / cfg.params.j;
  for (int n = 0; n <= cfg.n_periods_max; ++n) {
    OtocRow r;
    r.n = n;
    r.t = n * period;
    r.exact = exact_otoc(cfg, n);
    r.exact_modified = exact_modified_otoc(cfg, n);
    r.estimate = std::numeric_limits<double>::quiet_NaN();
    r.stderr_jk = std::numeric_limits<double>::quiet_NaN();
    rows.push_back(r);
  }
  return rows;
}

OtocEstimate estimate_otoc(const OtocConfig& cfg, int workers) {
  validate(cfg);
  if (cfg.n_periods_max < 1)
    throw std::invalid_argument("the protocol needs at least one period");
  const auto [w, v] = build_observables(cfg);
  const Vector psi0 = initial_state_vector(cfg);
  const Matrix step = floquet_step(cfg.params);
  const int n_max = cfg.n_periods_max;
  const std::size_t n_u = static_cast<std::size_t>(cfg.n_unitaries);

  OtocEstimate out;
  out.w_exp.resize(static_cast<Eigen::Index>(n_u), n_max);
  out.vwv_exp.resize(static_cast<Eigen::Index>(n_u), n_max);

  // one unitary per cell; the same scheme stream layout as sample_ensemble so
  // runs with different worker counts see identical draws
  parallel_for(n_u, workers, [&](std::size_t i) {
    rng::Stream stream(cfg.seed, i);
    const Matrix u = sample_unitary(cfg.scheme, stream);
    Vector s1 = u * psi0;
    Vector s2 = v * s1;
    for (int n = 1; n <= n_max; ++n) {
      s1 = step * s1;
      s2 = step * s2;
      out.w_exp(static_cast<Eigen::Index>(i), n - 1) = expectation(s1, w);
      out.vwv_exp(static_cast<Eigen::Index>(i), n - 1) = expectation(s2, w);
    }
  });

  const double period = cfg.params.jt / cfg.params.j;
  std::vector<double> xs(n_u), ys(n_u);
  for (int n = 1; n <= n_max; ++n) {
    for (std::size_t i = 0; i < n_u; ++i) {
      xs[i] = out.w_exp(static_cast<Eigen::Index>(i), n - 1);
      ys[i] = out.vwv_exp(static_cast<Eigen::Index>(i), n - 1);
    }
    const EstimateStat st = reduce_pairs(xs, ys);
    OtocRow r;
    r.n = n;
    r.t = n * period;
    r.exact = exact_otoc(cfg, n);
    r.exact_modified = exact_modified_otoc(cfg, n);
    r.estimate = st.estimate;
    r.stderr_jk = st.stderr_jk;
    r.n_unitaries = cfg.n_unitaries;
    r.unreliable = st.unreliable;
    out.series.push_back(r);
  }
  return out;
}

std::vector<std::pair<double, double>> sample_distribution(const OtocConfig& cfg, int n_periods,
                                                           int workers) {
  validate(cfg);
  if (n_periods < 0) throw std::invalid_argument("period count must be non-negative");
  const std::size_t n_u = static_cast<std::size_t>(cfg.n_unitaries);
  std::vector<std::pair<double, double>> pairs(n_u);
  parallel_for(n_u, workers, [&](std::size_t i) {
    rng::Stream stream(cfg.seed, i);
    const Matrix u = sample_unitary(cfg.scheme, stream);
    pairs[i] = sample_pair(cfg, u, n_periods);
  });
  return pairs;
}

}  // namespace qsim
