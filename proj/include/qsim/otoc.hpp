#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qsim/common.hpp"
#include "qsim/kicked_ising.hpp"
#include "qsim/random_unitary.hpp"

namespace qsim {

// Butterfly experiment configuration. W sits at w_site, the perturbation V at
// v_site, both Pauli letters. Sites are 1-based with site 1 the leftmost
// tensor factor, matching the operator conventions.
struct OtocConfig {
  KickedIsingParams params;
  int w_site = 4;
  int v_site = 1;
  char w_pauli = 'Z';
  char v_pauli = 'Z';
  int n_periods_max = 23;
  int n_unitaries = 50;
  SchemeSpec scheme;
  // bitstring like "0000"; empty means the all-zeros product state
  std::string initial_state;
  // subset weight is base^|A|; 1.0 reproduces the plain subset sum, which is
  // what the local-scrambling estimator actually converges to
  double modified_weight_base = 1.0;
  std::uint64_t seed = 0;
};

void validate(const OtocConfig& cfg);

// initial state vector for the configured register
Vector initial_state_vector(const OtocConfig& cfg);

// infinite-temperature OTOC Re Tr[W(t) V^dag W(t) V] / 2^N after n periods
double exact_otoc(const OtocConfig& cfg, int n_periods);

// subset-resolved variant: sum over non-empty site subsets A of
// base^|A| Tr[W(t)_A B(t)_A], normalized by the geometric mean of the same
// sums with B -> W and W -> B, where X_A traces out the complement of A and
// B = V^dag W(t) V. Equals 1 at t = 0 for any base.
double exact_modified_otoc(const OtocConfig& cfg, int n_periods);

// expectation pair (<W(t)>, <V^dag W(t) V>) in the state u|psi_0>
std::pair<double, double> sample_pair(const OtocConfig& cfg, const Matrix& u, int n_periods);

struct EstimateStat {
  double estimate = 0;
  double stderr_jk = 0;
  bool unreliable = false;
};

// correlator estimate mean(x*y) / sqrt(mean(x^2) * mean(y^2)) with a
// leave-one-out jackknife error bar. Flags the row as unreliable (NaN
// estimate) when either denominator mean falls below 1e-12.
EstimateStat reduce_pairs(const std::vector<double>& xs, const std::vector<double>& ys);

struct OtocRow {
  int n = 0;
  double t = 0;
  double exact = 0;
  double exact_modified = 0;
  double estimate = 0;
  double stderr_jk = 0;
  int n_unitaries = 0;
  bool unreliable = false;
};

using OtocSeries = std::vector<OtocRow>;

// exact curves only, rows n = 0 .. n_periods_max
OtocSeries exact_series(const OtocConfig& cfg);

struct OtocEstimate {
  OtocSeries series;  // rows n = 1 .. n_periods_max, exact columns filled too
  // raw per-sample expectations, one row per unitary, column n-1 for period n
  Eigen::MatrixXd w_exp;
  Eigen::MatrixXd vwv_exp;
};

// randomized-measurement protocol: draws cfg.n_unitaries initial unitaries
// once, reuses them across every period, and estimates the correlator per
// period with jackknife error bars
OtocEstimate estimate_otoc(const OtocConfig& cfg, int workers);

// scatter of per-unitary expectation pairs after n periods
std::vector<std::pair<double, double>> sample_distribution(const OtocConfig& cfg, int n_periods,
                                                           int workers);

}  // namespace qsim
