#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace qsim::harness {

// flat key = value configuration with provenance for every key so parse
// errors can point at the offending file line (line 0 marks an override
// supplied on the command line)
struct ConfigFile {
  std::string path;
  std::map<std::string, std::string> values;
  std::map<std::string, int> lines;
  // effective values actually consulted by a command, defaults included;
  // recorded by the typed getters and dumped into the run manifest
  mutable std::map<std::string, std::string> resolved;
};

ConfigFile load_config(const std::string& path);
void set_override(ConfigFile& cfg, const std::string& key, const std::string& value);

// "path:line" for file keys, "command line" for overrides
std::string location(const ConfigFile& cfg, const std::string& key);

bool has_key(const ConfigFile& cfg, const std::string& key);
std::string get_string(const ConfigFile& cfg, const std::string& key, const std::string& fallback);
int get_int(const ConfigFile& cfg, const std::string& key, int fallback);
double get_double(const ConfigFile& cfg, const std::string& key, double fallback);
bool get_bool(const ConfigFile& cfg, const std::string& key, bool fallback);
std::vector<int> get_int_list(const ConfigFile& cfg, const std::string& key,
                              const std::vector<int>& fallback);
std::vector<double> get_double_list(const ConfigFile& cfg, const std::string& key,
                                    const std::vector<double>& fallback);

// rejects keys no command clause knows about, citing where they were set
void require_known_keys(const ConfigFile& cfg, const std::vector<std::string>& allowed);

struct RunContext {
  ConfigFile cfg;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out;  // output path; empty picks the per-command default
};

int cmd_exact(const RunContext& ctx);
int cmd_protocol(const RunContext& ctx);
int cmd_frame_potential(const RunContext& ctx);
int cmd_compile(const RunContext& ctx);

// 17 significant digits, enough to round-trip a double; NaN prints as "nan"
std::string fmt17(double v);

std::uint32_t file_crc32(const std::string& path);

}  // namespace qsim::harness
