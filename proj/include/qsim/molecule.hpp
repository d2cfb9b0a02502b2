#pragma once

#include <string>
#include <vector>

#include "qsim/common.hpp"

namespace qsim {

// Spin system of a molecule in a static field: per-spin offset frequencies
// (chemical shifts, Hz) and a symmetric scalar-coupling table (Hz).
struct MoleculeSpec {
  int n_spins = 0;
  std::vector<double> larmor_hz;
  Eigen::MatrixXd j_hz;
};

void validate(const MoleculeSpec& m);

// Shipped 4-spin carbon-backbone defaults. The three chain couplings are
// back-solved from the shipped block-timing targets; the long-range entries
// default to zero. The offsets are synthetic placeholders with magnitudes
// typical of a carbon spectrum; the refocusing randomization needs them
// nonzero (see README).
MoleculeSpec crotonic_default();

// Parse a molecule file; format documented in the README and in
// data/crotonic.mol. Errors cite path:line.
MoleculeSpec load_molecule(const std::string& path);

// Natural static Hamiltonian in rad/s, diagonal in the computational basis:
//   -sum_i (w_i/2) sigma^z_i + pi sum_{i<j} (J_ij/2) sigma^z_i sigma^z_j
// with w_i = 2*pi*larmor_hz[i]. Evolution times are in seconds.
Matrix nmr_hamiltonian(const MoleculeSpec& m);

// Copy with every coupling beyond |i-j|=1 removed.
MoleculeSpec nearest_neighbor_only(const MoleculeSpec& m);

}  // namespace qsim
