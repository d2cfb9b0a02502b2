#include "qsim/molecule.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qsim/operators.hpp"

namespace qsim {

void validate(const MoleculeSpec& m) {
  if (m.n_spins < 2) throw std::invalid_argument("molecule needs at least 2 spins");
  if (static_cast<int>(m.larmor_hz.size()) != m.n_spins)
    throw std::invalid_argument("molecule offset count does not match n_spins");
  if (m.j_hz.rows() != m.n_spins || m.j_hz.cols() != m.n_spins)
    throw std::invalid_argument("molecule coupling table does not match n_spins");
  for (int i = 0; i < m.n_spins; ++i) {
    if (m.j_hz(i, i) != 0.0) throw std::invalid_argument("coupling table diagonal must be zero");
    for (int k = 0; k < i; ++k)
      if (m.j_hz(i, k) != m.j_hz(k, i))
        throw std::invalid_argument("coupling table must be symmetric");
  }
}

MoleculeSpec crotonic_default() {
  MoleculeSpec m;
  m.n_spins = 4;
  m.larmor_hz = {2500.0, 17500.0, 14500.0, -5000.0};
  m.j_hz = Eigen::MatrixXd::Zero(4, 4);
  m.j_hz(0, 1) = m.j_hz(1, 0) = 41.6431576365;
  m.j_hz(1, 2) = m.j_hz(2, 1) = 69.6711105190;
  m.j_hz(2, 3) = m.j_hz(3, 2) = 72.4460622893;
  return m;
}

namespace {
[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& what) {
  throw std::invalid_argument(path + ":" + std::to_string(line) + ": " + what);
}
}  // namespace

MoleculeSpec load_molecule(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open molecule file '" + path + "'");

  MoleculeSpec m;
  std::string line;
  int lineno = 0;
  bool saw_units = false, in_couplings = false;
  int coupling_row = 1;  // triangular rows are for spins 2..n

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;

    if (in_couplings) {
      // triangular block: row r holds J_{1,r+1} .. J_{r,r+1}
      if (coupling_row >= m.n_spins) parse_fail(path, lineno, "too many coupling rows");
      std::istringstream row(line);
      for (int k = 0; k < coupling_row; ++k) {
        double v;
        if (!(row >> v)) parse_fail(path, lineno, "coupling row needs " +
                                                      std::to_string(coupling_row) + " entries");
        m.j_hz(k, coupling_row) = m.j_hz(coupling_row, k) = v;
      }
      double extra;
      if (row >> extra) parse_fail(path, lineno, "too many entries in coupling row");
      ++coupling_row;
      continue;
    }

    if (tok == "units:") {
      std::string u;
      if (!(ss >> u) || u != "hz") parse_fail(path, lineno, "expected 'units: hz'");
      saw_units = true;
    } else if (tok == "spins:") {
      if (!(ss >> m.n_spins) || m.n_spins < 2) parse_fail(path, lineno, "bad spin count");
      m.j_hz = Eigen::MatrixXd::Zero(m.n_spins, m.n_spins);
    } else if (tok == "offset:") {
      double v;
      if (m.n_spins == 0) parse_fail(path, lineno, "'spins:' must come before offsets");
      if (!(ss >> v)) parse_fail(path, lineno, "bad offset value");
      m.larmor_hz.push_back(v);
    } else if (tok == "couplings:") {
      if (m.n_spins == 0) parse_fail(path, lineno, "'spins:' must come before couplings");
      if (static_cast<int>(m.larmor_hz.size()) != m.n_spins)
        parse_fail(path, lineno, "expected one offset line per spin before couplings");
      in_couplings = true;
    } else {
      parse_fail(path, lineno, "unknown directive '" + tok + "'");
    }
  }

  if (!saw_units) throw std::invalid_argument(path + ": missing 'units: hz' header");
  if (coupling_row != m.n_spins)
    throw std::invalid_argument(path + ": coupling block has " + std::to_string(coupling_row - 1) +
                                " rows, expected " + std::to_string(m.n_spins - 1));
  validate(m);
  return m;
}

Matrix nmr_hamiltonian(const MoleculeSpec& m) {
  validate(m);
  if (m.n_spins > max_qubits())
    throw std::invalid_argument("molecule exceeds the configured register limit");
  const Eigen::Index dim = Eigen::Index{1} << m.n_spins;
  Matrix h = Matrix::Zero(dim, dim);
  for (int i = 1; i <= m.n_spins; ++i) {
    const double w = 2.0 * std::numbers::pi * m.larmor_hz[static_cast<std::size_t>(i - 1)];
    h += -0.5 * w * site_pauli('Z', i, m.n_spins);
  }
  for (int i = 1; i <= m.n_spins; ++i)
    for (int k = i + 1; k <= m.n_spins; ++k)
      h += std::numbers::pi * 0.5 * m.j_hz(i - 1, k - 1) *
           (site_pauli('Z', i, m.n_spins) * site_pauli('Z', k, m.n_spins));
  return h;
}

MoleculeSpec nearest_neighbor_only(const MoleculeSpec& m) {
  MoleculeSpec out = m;
  for (int i = 0; i < m.n_spins; ++i)
    for (int k = 0; k < m.n_spins; ++k)
      if (std::abs(i - k) > 1) out.j_hz(i, k) = 0.0;
  return out;
}

}  // namespace qsim
