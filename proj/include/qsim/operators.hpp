#pragma once

#include <string>
#include <vector>

#include "qsim/common.hpp"

namespace qsim {

// Dense multi-qubit operator algebra on registers of up to max_qubits()
// spins. Convention used everywhere: qubit 1 is the leftmost tensor factor,
// i.e. the most significant bit of a basis index.

// Configurable register ceiling; guards against runaway kron dimensions.
int max_qubits();
void set_max_qubits(int n);

struct PauliString {
  int n_qubits = 0;
  std::string letters;  // over {I, X, Y, Z}, length n_qubits
};

// single-qubit Pauli matrix for letter in {I, X, Y, Z}
Matrix pauli(char letter);

// dense 2^n x 2^n realization of a Pauli string
Matrix embed_pauli(const PauliString& p);

// letter on one site, identity elsewhere
Matrix site_pauli(char letter, int site, int n_qubits);

// Kronecker product; errors out when the result would exceed the register limit
Matrix kron(const Matrix& a, const Matrix& b);

// e^{-i h t} for Hermitian h via eigendecomposition; the reconstruction is
// unitary up to rounding, which Pade scaling-squaring would not guarantee.
Matrix expm_hermitian(const Matrix& h, double t);

// Trace out every qubit not in `keep` (1-based site labels, any order).
// The result keeps the sites in ascending order.
Matrix partial_trace(const Matrix& x, const std::vector<int>& keep, int n_qubits);

// <state|obs|state>; the imaginary residue is checked against tol_unitary
// before being discarded.
double expectation(const Vector& state, const Matrix& obs);

// computational basis state from a bit label, e.g. "0000"; site 1 first
Vector basis_state(const std::string& bits);

// max-norm unitarity test ||U^dag U - I||_max <= tol
bool is_unitary(const Matrix& u, double tol = tol_unitary);

}  // namespace qsim
