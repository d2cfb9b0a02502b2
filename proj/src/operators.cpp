#include "qsim/operators.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>

namespace qsim {

namespace {
std::atomic<int> g_max_qubits{10};

std::int64_t max_dim() { return std::int64_t{1} << g_max_qubits.load(); }
}  // namespace

int max_qubits() { return g_max_qubits.load(); }

void set_max_qubits(int n) {
  if (n < 1 || n > 30) throw std::invalid_argument("register limit must be in [1, 30]");
  g_max_qubits.store(n);
}

Matrix pauli(char letter) {
  Matrix m(2, 2);
  switch (letter) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default:
      throw std::invalid_argument(std::string("unknown Pauli letter '") + letter + "'");
  }
  return m;
}

Matrix embed_pauli(const PauliString& p) {
  if (p.n_qubits < 1) throw std::invalid_argument("Pauli string needs at least one qubit");
  if (static_cast<int>(p.letters.size()) != p.n_qubits)
    throw std::invalid_argument("Pauli string length does not match its qubit count");
  if (p.n_qubits > max_qubits())
    throw std::invalid_argument("Pauli string exceeds the configured register limit");
  Matrix out = pauli(p.letters[0]);
  for (int i = 1; i < p.n_qubits; ++i) out = kron(out, pauli(p.letters[i]));
  return out;
}

Matrix site_pauli(char letter, int site, int n_qubits) {
  if (site < 1 || site > n_qubits) throw std::invalid_argument("site index out of range");
  PauliString p{n_qubits, std::string(static_cast<std::size_t>(n_qubits), 'I')};
  p.letters[static_cast<std::size_t>(site - 1)] = letter;
  return embed_pauli(p);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  const std::int64_t rows = std::int64_t{a.rows()} * b.rows();
  const std::int64_t cols = std::int64_t{a.cols()} * b.cols();
  if (rows > max_dim() || cols > max_dim())
    throw std::invalid_argument("kron result exceeds the configured register limit");
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix expm_hermitian(const Matrix& h, double t) {
  if (h.rows() != h.cols()) throw std::invalid_argument("expm_hermitian needs a square matrix");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > tol_unitary * scale)
    throw std::invalid_argument("expm_hermitian input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed in expm_hermitian");
  const auto& vals = es.eigenvalues();
  const Matrix& vecs = es.eigenvectors();
  Vector phases(vals.size());
  for (Eigen::Index k = 0; k < vals.size(); ++k)
    phases(k) = std::exp(cplx(0, -vals(k) * t));
  return vecs * phases.asDiagonal() * vecs.adjoint();
}

Matrix partial_trace(const Matrix& x, const std::vector<int>& keep, int n_qubits) {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  if (x.rows() != dim || x.cols() != dim)
    throw std::invalid_argument("operator dimension does not match the qubit count");

  std::vector<int> kept = keep;
  std::sort(kept.begin(), kept.end());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (kept[i] < 1 || kept[i] > n_qubits) throw std::invalid_argument("kept site out of range");
    if (i > 0 && kept[i] == kept[i - 1]) throw std::invalid_argument("duplicate kept site");
  }

  // bit position of site s within a basis index (site 1 = most significant)
  std::vector<int> keep_pos, trace_pos;
  for (int s = 1; s <= n_qubits; ++s) {
    const bool is_kept = std::find(kept.begin(), kept.end(), s) != kept.end();
    (is_kept ? keep_pos : trace_pos).push_back(n_qubits - s);
  }

  const int n_keep = static_cast<int>(keep_pos.size());
  const int n_trace = static_cast<int>(trace_pos.size());
  const Eigen::Index dk = Eigen::Index{1} << n_keep;
  const Eigen::Index dt = Eigen::Index{1} << n_trace;

  // scatter the bits of a reduced/traced index into a full register index
  auto splice = [](Eigen::Index bits, const std::vector<int>& pos) {
    Eigen::Index out = 0;
    const int n = static_cast<int>(pos.size());
    for (int k = 0; k < n; ++k)
      if ((bits >> (n - 1 - k)) & 1) out |= Eigen::Index{1} << pos[static_cast<std::size_t>(k)];
    return out;
  };

  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index a = 0; a < dk; ++a) {
    const Eigen::Index ra = splice(a, keep_pos);
    for (Eigen::Index b = 0; b < dk; ++b) {
      const Eigen::Index rb = splice(b, keep_pos);
      cplx acc = 0;
      for (Eigen::Index c = 0; c < dt; ++c) {
        const Eigen::Index rc = splice(c, trace_pos);
        acc += x(ra | rc, rb | rc);
      }
      out(a, b) = acc;
    }
  }
  return out;
}

double expectation(const Vector& state, const Matrix& obs) {
  if (obs.rows() != state.size() || obs.cols() != state.size())
    throw std::invalid_argument("state and observable dimensions do not match");
  const cplx val = state.dot(obs * state);
  if (std::abs(val.imag()) > tol_unitary)
    throw std::invalid_argument("expectation value has a non-negligible imaginary part");
  return val.real();
}

Vector basis_state(const std::string& bits) {
  const int n = static_cast<int>(bits.size());
  if (n < 1) throw std::invalid_argument("empty basis label");
  if (n > max_qubits()) throw std::invalid_argument("basis label exceeds the register limit");
  Eigen::Index idx = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("basis label must be over {0,1}");
    idx = (idx << 1) | (c == '1' ? 1 : 0);
  }
  Vector v = Vector::Zero(Eigen::Index{1} << n);
  v(idx) = 1.0;
  return v;
}

bool is_unitary(const Matrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const Matrix g = u.adjoint() * u;
  return (g - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace qsim
