#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qsim {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Tolerance ladder shared by every module: exact constructions, unitarity
// and expectation checks, and composed evolutions accumulate error in that
// order, so each class gets its own budget.
inline constexpr double tol_construct = 1e-12;
inline constexpr double tol_unitary = 1e-10;
inline constexpr double tol_evolve = 1e-9;

// Raised when a requested computation is well-formed but has no valid
// numerical solution (e.g. pulse timings that fall outside their block).
// The CLI maps this to exit code 2, plain validation errors to exit code 1.
class infeasible_error : public std::runtime_error {
 public:
  explicit infeasible_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qsim
