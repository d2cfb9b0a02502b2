#pragma once

#include <vector>

#include "qsim/common.hpp"
#include "qsim/molecule.hpp"

namespace qsim {

// Refocused delay block for a 4-spin chain. The block runs for tau with a
// pi_x pulse on spin 4 at tau2, a pi_x pulse on spin 3 at tau1, a closing
// simultaneous pi_x on spins 3 and 4 at tau, then one z rotation per spin.
struct PulseTiming {
  double tau_ms = 0;
  double tau1_ms = 0;
  double tau2_ms = 0;
};

// times that rescale the three chain couplings onto a common target angle
// jt/2 per bond. Throws infeasible_error when the molecule cannot support
// the block (wrong spin count, nonpositive chain couplings, negative jt, or
// a (3,4) coupling weaker than (1,2), which no echo placement can fix).
PulseTiming solve_timing(const MoleculeSpec& m, double jt);

// z-rotation angles, one per spin, that cancel the chemical-shift phase
// accumulated across the block; each angle is reduced into [0, 2*pi)
std::vector<double> z_corrections(const MoleculeSpec& m, const PulseTiming& t);

// lab-frame propagator of the pulse block under the molecule Hamiltonian,
// including the trailing z corrections
Matrix simulate_block(const MoleculeSpec& m, const PulseTiming& t,
                      const std::vector<double>& alphas);

// ideal block: exp(-i (jt/2) sum_nn Z_i Z_{i+1}) on n_spins
Matrix zz_target(double jt, int n_spins);

// phase-insensitive overlap |Tr(a^dag b)| / dim
double process_fidelity(const Matrix& a, const Matrix& b);

struct CompileReport {
  PulseTiming timing;
  std::vector<double> alphas;
  // overlap with the ideal block when long-range couplings are zeroed
  double fidelity_nn = 0;
  // overlap with the ideal block under the full coupling table
  double fidelity_full = 0;
};

// full pipeline: solve the timing, reject schedules whose pulses fall
// outside the block, then score the compiled block against the ideal one
CompileReport compile_and_verify(const MoleculeSpec& m, double jt);

}  // namespace qsim
