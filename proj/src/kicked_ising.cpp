#include "qsim/kicked_ising.hpp"

#include "qsim/operators.hpp"

namespace qsim {

void validate(const KickedIsingParams& p) {
  if (p.n_spins < 2) throw std::invalid_argument("kicked Ising chain needs at least 2 spins");
  if (p.n_spins > max_qubits())
    throw std::invalid_argument("n_spins exceeds the configured register limit");
  if (p.j <= 0) throw std::invalid_argument("coupling J must be positive");
  if (p.jt < 0) throw std::invalid_argument("dimensionless period JT must be non-negative");
}

Matrix ising_generator(const KickedIsingParams& p) {
  validate(p);
  const Eigen::Index dim = Eigen::Index{1} << p.n_spins;
  Matrix h = Matrix::Zero(dim, dim);
  for (int i = 1; i < p.n_spins; ++i)
    h += p.j * (site_pauli('Z', i, p.n_spins) * site_pauli('Z', i + 1, p.n_spins));
  if (p.periodic && p.n_spins > 2)
    h += p.j * (site_pauli('Z', p.n_spins, p.n_spins) * site_pauli('Z', 1, p.n_spins));
  for (int i = 1; i <= p.n_spins; ++i) h += p.h_z * site_pauli('Z', i, p.n_spins);
  return h;
}

Matrix kick_generator(const KickedIsingParams& p) {
  validate(p);
  const Eigen::Index dim = Eigen::Index{1} << p.n_spins;
  Matrix h = Matrix::Zero(dim, dim);
  for (int i = 1; i <= p.n_spins; ++i) h += p.h_x * site_pauli('X', i, p.n_spins);
  return h;
}

Matrix floquet_step(const KickedIsingParams& p) {
  const double half_t = 0.5 * p.jt / p.j;
  return expm_hermitian(ising_generator(p), half_t) * expm_hermitian(kick_generator(p), half_t);
}

Matrix floquet_step_factored(const KickedIsingParams& p) {
  const double half_t = 0.5 * p.jt / p.j;
  KickedIsingParams zz_only = p;
  zz_only.h_z = 0.0;
  const Eigen::Index dim = Eigen::Index{1} << p.n_spins;
  Matrix hz = Matrix::Zero(dim, dim);
  for (int i = 1; i <= p.n_spins; ++i) hz += p.h_z * site_pauli('Z', i, p.n_spins);
  return expm_hermitian(ising_generator(zz_only), half_t) *
         expm_hermitian(kick_generator(p), half_t) * expm_hermitian(hz, half_t);
}

Matrix evolve(const KickedIsingParams& p, int n_periods) {
  if (n_periods < 0) throw std::invalid_argument("period count must be non-negative");
  const Matrix step = floquet_step(p);
  Matrix u = Matrix::Identity(step.rows(), step.cols());
  for (int k = 0; k < n_periods; ++k) u = step * u;
  return u;
}

}  // namespace qsim
