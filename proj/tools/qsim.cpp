#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qsim/common.hpp"
#include "qsim/harness.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config, "key = value configuration file");
  sub->add_option("--seed", args.seed, "master seed; required so every run is reproducible")
      ->required();
  sub->add_option("--workers", args.workers, "worker thread count")
      ->check(CLI::PositiveNumber)
      ->default_val(1);
  sub->add_option("--out", args.out, "output path (per-command default otherwise)");
  sub->add_option("--set", args.sets, "override a config key, e.g. --set n_unitaries=800");
}

qsim::harness::RunContext make_context(const CommonArgs& args) {
  qsim::harness::RunContext ctx;
  if (!args.config.empty()) ctx.cfg = qsim::harness::load_config(args.config);
  for (const std::string& kv : args.sets) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    qsim::harness::set_override(ctx.cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  ctx.seed = args.seed;
  ctx.workers = args.workers;
  ctx.out = args.out;
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kicked-chain correlator simulator and NMR refocusing compiler"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "qsim 0.1.0");

  CommonArgs args;
  CLI::App* exact = app.add_subcommand("exact", "exact correlator curves");
  CLI::App* protocol =
      app.add_subcommand("protocol", "randomized-measurement estimate with error bars");
  CLI::App* frame =
      app.add_subcommand("frame-potential", "ensemble quality sweeps (F1, F2 columns)");
  CLI::App* compile = app.add_subcommand("compile", "solve and verify the refocused delay block");
  for (CLI::App* sub : {exact, protocol, frame, compile}) add_common(sub, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and --version land here with exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const qsim::harness::RunContext ctx = make_context(args);
    if (exact->parsed()) return qsim::harness::cmd_exact(ctx);
    if (protocol->parsed()) return qsim::harness::cmd_protocol(ctx);
    if (frame->parsed()) return qsim::harness::cmd_frame_potential(ctx);
    return qsim::harness::cmd_compile(ctx);
  } catch (const qsim::infeasible_error& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
