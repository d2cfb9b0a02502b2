#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qsim/common.hpp"
#include "qsim/molecule.hpp"
#include "qsim/rng.hpp"

namespace qsim {

// The four ways this project draws random unitaries: exact Haar on the full
// register, products of single-spin unitaries (exactly Haar per spin, or the
// experiment-style uniform axis + uniform angle recipe), and pseudorandom
// unitaries generated by evolving under a randomized refocusing Hamiltonian
// with alternating Z/X bases.
enum class SchemeKind { GlobalHaar, LocalHaar, LocalAxisAngle, DesignHamiltonian };

SchemeKind parse_scheme(const std::string& name);
std::string scheme_name(SchemeKind kind);

struct DesignParams {
  double period_ms = 20.0;
  int n_segments = 4;  // even: Z/X bases alternate in pairs
  MoleculeSpec molecule;
};

void validate(const DesignParams& d);

struct SchemeSpec {
  SchemeKind kind = SchemeKind::GlobalHaar;
  int n_spins = 4;
  DesignParams design;  // used only for DesignHamiltonian
};

// Random pulse-time fractions, one row per refocusing segment.
struct RefocusSchedule {
  Eigen::MatrixXd lambdas;  // n_segments x n_spins, entries in [0,1)
};

struct UnitaryEnsemble {
  int dim = 0;
  std::uint64_t seed = 0;
  std::string provenance;
  std::vector<Matrix> members;
};

// Exactly Haar-distributed unitary: complex Ginibre matrix, QR, then each
// column rescaled by the phase of the matching diagonal entry of R. The
// phase fix removes the QR sign ambiguity; without it the distribution is
// orthonormal but not Haar.
Matrix sample_haar(int dim, rng::Stream& rng);

// Tensor product of independent single-spin unitaries. mode selects
// LocalHaar (each factor Haar on U(2)) or LocalAxisAngle
// (exp(-i theta/2 n.sigma), n uniform on the sphere, theta uniform on
// [0, 2pi) -- deliberately not Haar; kept for protocol comparisons).
Matrix sample_local_product(int n_spins, SchemeKind mode, rng::Stream& rng);

RefocusSchedule sample_schedule(const DesignParams& d, rng::Stream& rng);

// Effective Hamiltonian of one refocusing segment in basis b in {Z, X}:
//   H = -sum_i w_i^eff sigma^b_i + pi sum_{i<j} J_ij^eff sigma^b_i sigma^b_j
// with w_i^eff = (1-2*lam_i) * 2*pi*larmor_hz_i and
// J_ij^eff = (1-|lam_i-lam_j|) * J_ij, over the full coupling graph.
Matrix effective_hamiltonian(const Eigen::VectorXd& lams, char basis, const MoleculeSpec& m);

// Deterministic evolution for a given schedule: ordered product over
// segments m = 1..n_segments of exp(-i H^(m) T/2), bases alternating
// Z, X, Z, X, ... with every segment lasting half the period.
Matrix design_unitary(const DesignParams& d, const RefocusSchedule& sched);

// Draw a fresh schedule and evolve it.
Matrix sample_design_unitary(const DesignParams& d, rng::Stream& rng);

// Dispatch on scheme kind.
Matrix sample_unitary(const SchemeSpec& scheme, rng::Stream& rng);

// count members, sample i drawn from stream (seed, i); safe to parallelize
// because the streams are pre-assigned.
UnitaryEnsemble sample_ensemble(const SchemeSpec& scheme, int count, std::uint64_t seed,
                                int workers);

// Frame potential of the ensemble for k in {1, 2}.
// include_self=false (default) is the unbiased pair estimator
//   F = (1/(M(M-1))) sum_{u != v} |Tr(u^dag v)|^{2k},
// which converges to k! for Haar-converged ensembles. include_self=true
// averages over all M^2 ordered pairs including u=v; the diagonal adds a
// d^{2k}/M floor, which dominates small ensembles (a singleton gives d^{2k}).
double frame_potential(const UnitaryEnsemble& ens, int k, bool include_self = false);

struct FramePotentialRow {
  double x;  // sweep coordinate: period in ms, sample count, or time in ms
  double f1;
  double f2;
};

// Convergence-over-time study: every sampled trajectory is truncated at each
// requested time (a partial segment evolves for the remaining fraction) and
// the frame potentials of the truncated ensemble are reported. Times past
// the end of the sequence clamp to the full evolution.
std::vector<FramePotentialRow> frame_potential_trace(const DesignParams& d,
                                                     const std::vector<double>& times_ms,
                                                     int n_samples, std::uint64_t seed,
                                                     int workers);

// Text export/import, full double precision; see README for the layout.
void save_ensemble(const std::string& path, const UnitaryEnsemble& ens);
UnitaryEnsemble load_ensemble(const std::string& path);

}  // namespace qsim
