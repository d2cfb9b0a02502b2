#include "qsim/pulse_compiler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qsim/operators.hpp"

namespace qsim {

PulseTiming solve_timing(const MoleculeSpec& m, double jt) {
  validate(m);
  if (m.n_spins != 4)
    throw infeasible_error("the delay block is defined for a 4-spin chain");
  if (jt < 0) throw infeasible_error("cannot compile a negative coupling angle");
  const double j12 = m.j_hz(0, 1), j23 = m.j_hz(1, 2), j34 = m.j_hz(2, 3);
  if (!(j12 > 0) || !(j23 > 0) || !(j34 > 0))
    throw infeasible_error("all three chain couplings must be positive");

  // bond (1,2) evolves for the whole block; bond (2,3) sees the signed time
  // 2*tau1 - tau, and bond (3,4), flipped once by each pi pulse, sees
  // tau - 2*(tau1 - tau2). That last window cannot be negative, so a (3,4)
  // coupling weaker than (1,2) can never catch up within the block.
  if (j34 < j12)
    throw infeasible_error("bond (3,4) is weaker than bond (1,2); no echo time reaches "
                           "the target angle");
  const double tau_s = jt / (std::numbers::pi * j12);
  const double tau1_s = 0.5 * (j12 * tau_s / j23 + tau_s);
  const double tau2_s = tau1_s - 0.5 * (tau_s - j12 * tau_s / j34);

  // algebraic sanity: every bond angle must land on jt/2 exactly
  const double r12 = std::numbers::pi * j12 * tau_s - jt;
  const double r23 = std::numbers::pi * j23 * (2 * tau1_s - tau_s) - jt;
  const double r34 = std::numbers::pi * j34 * (tau_s - 2 * (tau1_s - tau2_s)) - jt;
  if (std::abs(r12) > 1e-9 || std::abs(r23) > 1e-9 || std::abs(r34) > 1e-9)
    throw std::runtime_error("timing solution failed its residual check");

  return {tau_s * 1e3, tau1_s * 1e3, tau2_s * 1e3};
}

std::vector<double> z_corrections(const MoleculeSpec& m, const PulseTiming& t) {
  validate(m);
  if (m.n_spins != 4)
    throw infeasible_error("the delay block is defined for a 4-spin chain");
  const double tau = t.tau_ms * 1e-3;
  const double tau1 = t.tau1_ms * 1e-3;
  const double tau2 = t.tau2_ms * 1e-3;
  // signed evolution times per spin: 1 and 2 are never flipped, 3 is flipped
  // on [tau1, tau), 4 on [tau2, tau)
  const double signed_t[4] = {tau, tau, 2 * tau1 - tau, 2 * tau2 - tau};
  std::vector<double> alphas(4);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < 4; ++i) {
    const double omega = two_pi * m.larmor_hz[static_cast<std::size_t>(i)];
    double a = std::fmod(omega * signed_t[i], two_pi);
    if (a < 0) a += two_pi;
    alphas[static_cast<std::size_t>(i)] = a;
  }
  return alphas;
}

Matrix simulate_block(const MoleculeSpec& m, const PulseTiming& t,
                      const std::vector<double>& alphas) {
  validate(m);
  if (m.n_spins != 4)
    throw infeasible_error("the delay block is defined for a 4-spin chain");
  if (alphas.size() != 4) throw std::invalid_argument("need one z correction per spin");
  const double tau = t.tau_ms * 1e-3;
  const double tau1 = t.tau1_ms * 1e-3;
  const double tau2 = t.tau2_ms * 1e-3;
  if (tau < 0 || tau1 < 0 || tau1 > tau || tau2 < 0 || tau2 > tau)
    throw infeasible_error("pulse times must lie inside the block");

  const Matrix h = nmr_hamiltonian(m);

  struct Event {
    double time;
    int site;
  };
  std::vector<Event> events{{tau2, 4}, {tau1, 3}};
  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.time < b.time; });

  Matrix u = Matrix::Identity(h.rows(), h.cols());
  double now = 0;
  for (const Event& e : events) {
    u = expm_hermitian(h, e.time - now) * u;
    u = site_pauli('X', e.site, 4) * u;
    now = e.time;
  }
  u = expm_hermitian(h, tau - now) * u;
  u = site_pauli('X', 3, 4) * site_pauli('X', 4, 4) * u;
  for (int i = 1; i <= 4; ++i)
    u = expm_hermitian(site_pauli('Z', i, 4), 0.5 * alphas[static_cast<std::size_t>(i - 1)]) * u;
  return u;
}

Matrix zz_target(double jt, int n_spins) {
  if (n_spins < 2) throw std::invalid_argument("the target block needs at least 2 spins");
  const Eigen::Index dim = Eigen::Index{1} << n_spins;
  Matrix h = Matrix::Zero(dim, dim);
  for (int i = 1; i < n_spins; ++i)
    h += site_pauli('Z', i, n_spins) * site_pauli('Z', i + 1, n_spins);
  return expm_hermitian(h, 0.5 * jt);
}

double process_fidelity(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("propagators differ in dimension");
  return std::abs((a.conjugate().cwiseProduct(b)).sum()) / static_cast<double>(a.rows());
}

CompileReport compile_and_verify(const MoleculeSpec& m, double jt) {
  CompileReport rep;
  rep.timing = solve_timing(m, jt);
  if (rep.timing.tau1_ms < 0 || rep.timing.tau1_ms > rep.timing.tau_ms)
    throw infeasible_error("the spin-3 pulse lands outside the block; need j12 <= j23");
  if (rep.timing.tau2_ms < 0 || rep.timing.tau2_ms > rep.timing.tau_ms)
    throw infeasible_error("the spin-4 pulse lands outside the block");
  rep.alphas = z_corrections(m, rep.timing);

  const Matrix target = zz_target(jt, 4);
  rep.fidelity_nn =
      process_fidelity(simulate_block(nearest_neighbor_only(m), rep.timing, rep.alphas), target);
  rep.fidelity_full = process_fidelity(simulate_block(m, rep.timing, rep.alphas), target);
  return rep;
}

}  // namespace qsim
