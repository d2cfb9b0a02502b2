#include "qsim/harness.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "qsim/molecule.hpp"
#include "qsim/operators.hpp"
#include "qsim/otoc.hpp"
#include "qsim/pulse_compiler.hpp"
#include "qsim/random_unitary.hpp"

namespace qsim::harness {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::string piece;
  std::istringstream in(s);
  while (std::getline(in, piece, ',')) parts.push_back(trim(piece));
  return parts;
}

bool parse_int_full(const std::string& s, int& out) {
  try {
    std::size_t pos = 0;
    out = std::stoi(s, &pos);
    return pos == s.size() && !s.empty();
  } catch (...) {
    return false;
  }
}

bool parse_double_full(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size() && !s.empty();
  } catch (...) {
    return false;
  }
}

[[noreturn]] void bad_value(const ConfigFile& cfg, const std::string& key, const char* want) {
  throw std::invalid_argument(location(cfg, key) + ": value for '" + key + "' is not " + want +
                              " ('" + cfg.values.at(key) + "')");
}

}  // namespace

ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  ConfigFile cfg;
  cfg.path = path;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": empty key");
    if (value.empty())
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": empty value for '" +
                                  key + "'");
    // a repeated key simply takes the later line, like the CLI override path
    cfg.values[key] = value;
    cfg.lines[key] = lineno;
  }
  return cfg;
}

void set_override(ConfigFile& cfg, const std::string& key, const std::string& value) {
  if (key.empty()) throw std::invalid_argument("override with an empty key");
  cfg.values[key] = value;
  cfg.lines[key] = 0;
}

std::string location(const ConfigFile& cfg, const std::string& key) {
  const auto it = cfg.lines.find(key);
  if (it == cfg.lines.end()) throw std::logic_error("location() for a key that was never set");
  if (it->second == 0) return "command line";
  return cfg.path + ":" + std::to_string(it->second);
}

bool has_key(const ConfigFile& cfg, const std::string& key) { return cfg.values.count(key) > 0; }

std::string get_string(const ConfigFile& cfg, const std::string& key,
                       const std::string& fallback) {
  const auto it = cfg.values.find(key);
  const std::string v = it == cfg.values.end() ? fallback : it->second;
  cfg.resolved[key] = v;
  return v;
}

int get_int(const ConfigFile& cfg, const std::string& key, int fallback) {
  const auto it = cfg.values.find(key);
  if (it == cfg.values.end()) {
    cfg.resolved[key] = std::to_string(fallback);
    return fallback;
  }
  int v = 0;
  if (!parse_int_full(it->second, v)) bad_value(cfg, key, "an integer");
  cfg.resolved[key] = it->second;
  return v;
}

double get_double(const ConfigFile& cfg, const std::string& key, double fallback) {
  const auto it = cfg.values.find(key);
  if (it == cfg.values.end()) {
    cfg.resolved[key] = fmt17(fallback);
    return fallback;
  }
  double v = 0;
  if (!parse_double_full(it->second, v)) bad_value(cfg, key, "a number");
  cfg.resolved[key] = it->second;
  return v;
}

bool get_bool(const ConfigFile& cfg, const std::string& key, bool fallback) {
  const auto it = cfg.values.find(key);
  if (it == cfg.values.end()) {
    cfg.resolved[key] = fallback ? "true" : "false";
    return fallback;
  }
  const std::string& s = it->second;
  bool v = false;
  if (s == "true" || s == "1")
    v = true;
  else if (s == "false" || s == "0")
    v = false;
  else
    bad_value(cfg, key, "a boolean (true/false)");
  cfg.resolved[key] = s;
  return v;
}

std::vector<int> get_int_list(const ConfigFile& cfg, const std::string& key,
                              const std::vector<int>& fallback) {
  const auto it = cfg.values.find(key);
  if (it == cfg.values.end()) {
    std::string joined;
    for (int v : fallback) joined += (joined.empty() ? "" : ",") + std::to_string(v);
    cfg.resolved[key] = joined;
    return fallback;
  }
  std::vector<int> out;
  for (const std::string& piece : split_list(it->second)) {
    int v = 0;
    if (!parse_int_full(piece, v)) bad_value(cfg, key, "a comma-separated integer list");
    out.push_back(v);
  }
  if (out.empty()) bad_value(cfg, key, "a comma-separated integer list");
  cfg.resolved[key] = it->second;
  return out;
}

std::vector<double> get_double_list(const ConfigFile& cfg, const std::string& key,
                                    const std::vector<double>& fallback) {
  const auto it = cfg.values.find(key);
  if (it == cfg.values.end()) {
    std::string joined;
    for (double v : fallback) joined += (joined.empty() ? "" : ",") + fmt17(v);
    cfg.resolved[key] = joined;
    return fallback;
  }
  std::vector<double> out;
  for (const std::string& piece : split_list(it->second)) {
    double v = 0;
    if (!parse_double_full(piece, v)) bad_value(cfg, key, "a comma-separated number list");
    out.push_back(v);
  }
  if (out.empty()) bad_value(cfg, key, "a comma-separated number list");
  cfg.resolved[key] = it->second;
  return out;
}

void require_known_keys(const ConfigFile& cfg, const std::vector<std::string>& allowed) {
  for (const auto& [key, value] : cfg.values) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw std::invalid_argument(location(cfg, key) + ": unknown key '" + key +
                                  "' for this command");
  }
}

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint32_t file_crc32(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path + "' for checksumming");
  uLong crc = crc32(0L, Z_NULL, 0);
  char buf[65536];
  while (in) {
    in.read(buf, sizeof buf);
    const std::streamsize got = in.gcount();
    if (got > 0) crc = crc32(crc, reinterpret_cast<const Bytef*>(buf), static_cast<uInt>(got));
  }
  return static_cast<std::uint32_t>(crc);
}

namespace {

std::string iso8601_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunContext& ctx, const std::string& command,
                    const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["artifact"] = "qsim";
  j["version"] = "0.1.0";
  j["command"] = command;
  j["generated_at"] = iso8601_now();
  j["seed"] = ctx.seed;
  j["workers"] = ctx.workers;
  j["config"] = nlohmann::json::object();
  for (const auto& [k, v] : ctx.cfg.resolved) j["config"][k] = v;
  j["outputs"] = nlohmann::json::array();
  for (const std::string& p : outputs) {
    char hex[16];
    std::snprintf(hex, sizeof hex, "%08x", file_crc32(p));
    j["outputs"].push_back({{"path", p},
                            {"bytes", std::filesystem::file_size(p)},
                            {"crc32", std::string(hex)}});
  }
  const std::string mpath = outputs.front() + ".manifest.json";
  std::ofstream out(mpath);
  if (!out) throw std::invalid_argument("cannot open '" + mpath + "' for writing");
  out << j.dump(2) << "\n";
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot open '" + path + "' for writing");
  return f;
}

std::string stem_of(const std::string& path) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv")
    return path.substr(0, path.size() - 4);
  return path;
}

char pauli_letter(const ConfigFile& cfg, const std::string& key) {
  const std::string s = get_string(cfg, key, "Z");
  if (s.size() != 1) bad_value(cfg, key, "a single Pauli letter");
  return s[0];
}

KickedIsingParams chain_from_config(const ConfigFile& cfg) {
  KickedIsingParams p;
  p.n_spins = get_int(cfg, "n_spins", p.n_spins);
  p.j = get_double(cfg, "j", p.j);
  p.h_x = get_double(cfg, "h_x", p.h_x);
  p.h_z = get_double(cfg, "h_z", p.h_z);
  p.jt = get_double(cfg, "jt", p.jt);
  p.periodic = get_bool(cfg, "periodic", p.periodic);
  return p;
}

MoleculeSpec molecule_from_config(const ConfigFile& cfg) {
  const std::string path = get_string(cfg, "molecule", "");
  if (path.empty()) {
    cfg.resolved["molecule"] = "<builtin crotonic>";
    return crotonic_default();
  }
  return load_molecule(path);
}

DesignParams design_from_config(const ConfigFile& cfg) {
  DesignParams d;
  d.period_ms = get_double(cfg, "period_ms", d.period_ms);
  d.n_segments = get_int(cfg, "n_segments", d.n_segments);
  d.molecule = molecule_from_config(cfg);
  return d;
}

SchemeSpec scheme_from_config(const ConfigFile& cfg, int n_spins,
                              const std::string& default_scheme) {
  SchemeSpec s;
  s.kind = parse_scheme(get_string(cfg, "scheme", default_scheme));
  s.n_spins = n_spins;
  if (s.kind == SchemeKind::DesignHamiltonian) s.design = design_from_config(cfg);
  return s;
}

OtocConfig otoc_from_config(const ConfigFile& cfg, std::uint64_t seed, bool with_protocol) {
  OtocConfig c;
  c.params = chain_from_config(cfg);
  c.w_site = get_int(cfg, "w_site", c.params.n_spins);
  c.v_site = get_int(cfg, "v_site", 1);
  c.w_pauli = pauli_letter(cfg, "w_pauli");
  c.v_pauli = pauli_letter(cfg, "v_pauli");
  c.n_periods_max = get_int(cfg, "n_periods_max", 23);
  c.initial_state = get_string(cfg, "initial_state", "");
  c.modified_weight_base = get_double(cfg, "modified_weight_base", 1.0);
  c.seed = seed;
  if (with_protocol) {
    c.n_unitaries = get_int(cfg, "n_unitaries", 50);
    c.scheme = scheme_from_config(cfg, c.params.n_spins, "GlobalHaar");
  } else {
    c.scheme.n_spins = c.params.n_spins;
  }
  return c;
}

void apply_register_limit(const ConfigFile& cfg) {
  set_max_qubits(get_int(cfg, "max_spins", max_qubits()));
}

const std::vector<std::string>& chain_keys() {
  static const std::vector<std::string> keys = {"max_spins", "n_spins", "j",     "h_x",
                                                "h_z",       "jt",      "periodic"};
  return keys;
}

std::vector<std::string> exact_keys() {
  std::vector<std::string> keys = chain_keys();
  for (const char* k : {"w_site", "v_site", "w_pauli", "v_pauli", "initial_state",
                        "n_periods_max", "modified_weight_base"})
    keys.push_back(k);
  return keys;
}

std::vector<std::string> protocol_keys() {
  std::vector<std::string> keys = exact_keys();
  for (const char* k :
       {"n_unitaries", "scheme", "scatter_periods", "period_ms", "n_segments", "molecule"})
    keys.push_back(k);
  return keys;
}

}  // namespace

int cmd_exact(const RunContext& ctx) {
  require_known_keys(ctx.cfg, exact_keys());
  apply_register_limit(ctx.cfg);
  const OtocConfig c = otoc_from_config(ctx.cfg, ctx.seed, false);
  const OtocSeries rows = exact_series(c);

  const std::string out = ctx.out.empty() ? "otoc_exact.csv" : ctx.out;
  auto f = open_output(out);
  f << "n,t,exact,exact_modified\n";
  for (const OtocRow& r : rows)
    f << r.n << ',' << fmt17(r.t) << ',' << fmt17(r.exact) << ',' << fmt17(r.exact_modified)
      << '\n';
  f.close();

  write_manifest(ctx, "exact", {out});
  std::cerr << "exact: wrote " << rows.size() << " rows to " << out << "\n";
  return 0;
}

int cmd_protocol(const RunContext& ctx) {
  require_known_keys(ctx.cfg, protocol_keys());
  apply_register_limit(ctx.cfg);
  const OtocConfig c = otoc_from_config(ctx.cfg, ctx.seed, true);
  const std::vector<int> scatter = get_int_list(ctx.cfg, "scatter_periods", {});
  for (int k : scatter)
    if (k < 1 || k > c.n_periods_max)
      throw std::invalid_argument(location(ctx.cfg, "scatter_periods") +
                                  ": scatter period outside 1.." +
                                  std::to_string(c.n_periods_max));

  std::cerr << "protocol: " << c.n_unitaries << " unitaries (" << scheme_name(c.scheme.kind)
            << "), " << c.n_periods_max << " periods\n";
  const OtocEstimate est = estimate_otoc(c, ctx.workers);

  const std::string out = ctx.out.empty() ? "otoc_protocol.csv" : ctx.out;
  auto f = open_output(out);
  f << "n,t,exact,exact_modified,estimate,stderr,n_unitaries,scheme\n";
  const std::string sname = scheme_name(c.scheme.kind);
  for (const OtocRow& r : est.series) {
    if (r.unreliable)
      std::cerr << "warning: period " << r.n << " estimate has a degenerate denominator\n";
    f << r.n << ',' << fmt17(r.t) << ',' << fmt17(r.exact) << ',' << fmt17(r.exact_modified)
      << ',' << fmt17(r.estimate) << ',' << fmt17(r.stderr_jk) << ',' << r.n_unitaries << ','
      << sname << '\n';
  }
  f.close();

  std::vector<std::string> outputs{out};
  for (int k : scatter) {
    const std::string spath = stem_of(out) + "_scatter_n" + std::to_string(k) + ".csv";
    auto sf = open_output(spath);
    sf << "u_index,w_exp,vwv_exp\n";
    for (Eigen::Index i = 0; i < est.w_exp.rows(); ++i)
      sf << i << ',' << fmt17(est.w_exp(i, k - 1)) << ',' << fmt17(est.vwv_exp(i, k - 1)) << '\n';
    sf.close();
    outputs.push_back(spath);
  }

  write_manifest(ctx, "protocol", outputs);
  std::cerr << "protocol: wrote " << est.series.size() << " rows to " << out << "\n";
  return 0;
}

namespace {

std::vector<std::string> frame_potential_keys() {
  std::vector<std::string> keys = {"max_spins",       "n_spins",       "scheme",
                                   "period_ms",       "n_segments",    "molecule",
                                   "fp_mode",         "fp_samples",    "fp_periods_ms",
                                   "fp_sample_sizes", "fp_time_grid_ms", "dump_ensemble",
                                   "from_ensemble",   "fp_include_self"};
  return keys;
}

UnitaryEnsemble prefix_of(const UnitaryEnsemble& ens, std::size_t count) {
  UnitaryEnsemble p;
  p.dim = ens.dim;
  p.seed = ens.seed;
  p.provenance = ens.provenance;
  p.members.assign(ens.members.begin(), ens.members.begin() + static_cast<std::ptrdiff_t>(count));
  return p;
}

}  // namespace

int cmd_frame_potential(const RunContext& ctx) {
  require_known_keys(ctx.cfg, frame_potential_keys());
  apply_register_limit(ctx.cfg);
  const int n_spins = get_int(ctx.cfg, "n_spins", 4);
  const std::string mode = get_string(ctx.cfg, "fp_mode", "samples");
  const bool include_self = get_bool(ctx.cfg, "fp_include_self", false);
  const std::string dump_path = get_string(ctx.cfg, "dump_ensemble", "");
  const std::string from_path = get_string(ctx.cfg, "from_ensemble", "");

  std::vector<FramePotentialRow> rows;
  std::vector<std::string> extra_outputs;

  if (mode == "samples") {
    std::vector<int> sizes =
        get_int_list(ctx.cfg, "fp_sample_sizes", {2, 5, 10, 20, 50, 100, 200, 500});
    std::sort(sizes.begin(), sizes.end());
    if (sizes.front() < (include_self ? 1 : 2))
      throw std::invalid_argument("fp_sample_sizes entries are too small for the estimator");

    UnitaryEnsemble ens;
    if (!from_path.empty()) {
      ens = load_ensemble(from_path);
      std::cerr << "frame-potential: loaded " << ens.members.size() << " members from "
                << from_path << "\n";
      while (!sizes.empty() && sizes.back() > static_cast<int>(ens.members.size())) sizes.pop_back();
      if (sizes.empty())
        throw std::invalid_argument("every fp_sample_sizes entry exceeds the stored ensemble");
    } else {
      const SchemeSpec scheme = scheme_from_config(ctx.cfg, n_spins, "DesignHamiltonian");
      std::cerr << "frame-potential: sampling " << sizes.back() << " members ("
                << scheme_name(scheme.kind) << ")\n";
      ens = sample_ensemble(scheme, sizes.back(), ctx.seed, ctx.workers);
    }
    if (!dump_path.empty()) {
      save_ensemble(dump_path, ens);
      extra_outputs.push_back(dump_path);
    }
    for (int s : sizes) {
      const UnitaryEnsemble p = prefix_of(ens, static_cast<std::size_t>(s));
      rows.push_back({static_cast<double>(s), frame_potential(p, 1, include_self),
                      frame_potential(p, 2, include_self)});
    }
  } else if (mode == "period") {
    if (!from_path.empty() || !dump_path.empty())
      throw std::invalid_argument("ensemble files only make sense with fp_mode = samples");
    const std::string sname = get_string(ctx.cfg, "scheme", "DesignHamiltonian");
    if (parse_scheme(sname) != SchemeKind::DesignHamiltonian)
      throw std::invalid_argument("fp_mode = period sweeps the design period; scheme must be "
                                  "DesignHamiltonian");
    const int n_samples = get_int(ctx.cfg, "fp_samples", 50);
    const std::vector<double> periods =
        get_double_list(ctx.cfg, "fp_periods_ms", {2, 4, 6, 8, 10, 12, 14, 16, 18, 20});
    DesignParams base = design_from_config(ctx.cfg);
    if (base.molecule.n_spins != n_spins)
      throw std::invalid_argument("molecule size does not match n_spins");
    std::cerr << "frame-potential: " << periods.size() << " periods x " << n_samples
              << " members\n";
    for (double t_ms : periods) {
      DesignParams d = base;
      d.period_ms = t_ms;
      SchemeSpec scheme;
      scheme.kind = SchemeKind::DesignHamiltonian;
      scheme.n_spins = n_spins;
      scheme.design = d;
      const UnitaryEnsemble ens = sample_ensemble(scheme, n_samples, ctx.seed, ctx.workers);
      rows.push_back({t_ms, frame_potential(ens, 1, include_self),
                      frame_potential(ens, 2, include_self)});
    }
  } else if (mode == "time") {
    if (!from_path.empty() || !dump_path.empty())
      throw std::invalid_argument("ensemble files only make sense with fp_mode = samples");
    if (include_self)
      throw std::invalid_argument("the time trace always excludes self pairs");
    const std::string sname = get_string(ctx.cfg, "scheme", "DesignHamiltonian");
    if (parse_scheme(sname) != SchemeKind::DesignHamiltonian)
      throw std::invalid_argument("fp_mode = time follows the design sequence; scheme must be "
                                  "DesignHamiltonian");
    const int n_samples = get_int(ctx.cfg, "fp_samples", 50);
    std::vector<double> grid;
    for (int t = 0; t <= 40; ++t) grid.push_back(t);
    const std::vector<double> times = get_double_list(ctx.cfg, "fp_time_grid_ms", grid);
    DesignParams d = design_from_config(ctx.cfg);
    if (d.molecule.n_spins != n_spins)
      throw std::invalid_argument("molecule size does not match n_spins");
    std::cerr << "frame-potential: trace over " << times.size() << " times x " << n_samples
              << " members\n";
    rows = frame_potential_trace(d, times, n_samples, ctx.seed, ctx.workers);
  } else {
    throw std::invalid_argument(location(ctx.cfg, "fp_mode") +
                                ": fp_mode must be period, samples or time");
  }

  const std::string out = ctx.out.empty() ? "frame_potential.csv" : ctx.out;
  auto f = open_output(out);
  f << "x,f1,f2\n";
  for (const FramePotentialRow& r : rows)
    f << fmt17(r.x) << ',' << fmt17(r.f1) << ',' << fmt17(r.f2) << '\n';
  f.close();

  std::vector<std::string> outputs{out};
  for (const std::string& p : extra_outputs) outputs.push_back(p);
  write_manifest(ctx, "frame-potential", outputs);
  std::cerr << "frame-potential: wrote " << rows.size() << " rows to " << out << "\n";
  return 0;
}

int cmd_compile(const RunContext& ctx) {
  require_known_keys(ctx.cfg, {"max_spins", "jt", "molecule"});
  apply_register_limit(ctx.cfg);
  const MoleculeSpec m = molecule_from_config(ctx.cfg);
  const double jt = get_double(ctx.cfg, "jt", 1.6);
  const CompileReport rep = compile_and_verify(m, jt);

  std::printf("delay block for jt = %g\n", jt);
  std::printf("  tau  = %10.6f ms\n", rep.timing.tau_ms);
  std::printf("  tau1 = %10.6f ms  (pi_x on spin 3)\n", rep.timing.tau1_ms);
  std::printf("  tau2 = %10.6f ms  (pi_x on spin 4)\n", rep.timing.tau2_ms);
  std::printf("  z corrections (rad): %.6f %.6f %.6f %.6f\n", rep.alphas[0], rep.alphas[1],
              rep.alphas[2], rep.alphas[3]);
  std::printf("  fidelity vs ideal, chain couplings only: %.12f\n", rep.fidelity_nn);
  std::printf("  fidelity vs ideal, full coupling table:  %.12f\n", rep.fidelity_full);

  if (!ctx.out.empty()) {
    auto f = open_output(ctx.out);
    f << "quantity,value\n";
    f << "tau_ms," << fmt17(rep.timing.tau_ms) << '\n';
    f << "tau1_ms," << fmt17(rep.timing.tau1_ms) << '\n';
    f << "tau2_ms," << fmt17(rep.timing.tau2_ms) << '\n';
    for (std::size_t i = 0; i < rep.alphas.size(); ++i)
      f << "alpha" << (i + 1) << ',' << fmt17(rep.alphas[i]) << '\n';
    f << "fidelity_nn," << fmt17(rep.fidelity_nn) << '\n';
    f << "fidelity_full," << fmt17(rep.fidelity_full) << '\n';
    f.close();
    write_manifest(ctx, "compile", {ctx.out});
  }
  return 0;
}

}  // namespace qsim::harness
