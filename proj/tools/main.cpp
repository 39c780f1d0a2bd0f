#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace ricci::cli;

int main(int argc, char** argv) {
  CLI::App app{"Time-tau Ricci iteration on the two-sphere"};
  app.require_subcommand(1);

  std::string config_path, out_dir, snapshot_path;
  std::uint64_t seed = 0;
  int jobs = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key = value configuration file");
    sub->add_option("--seed", seed, "RNG seed (overrides the config)");
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--jobs", jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
  };
  CLI::App* run = app.add_subcommand("run", "run the iteration for every tau in the config");
  add_common(run);
  CLI::App* verify = app.add_subcommand("verify", "randomized inequality suite");
  add_common(verify);
  CLI::App* snap = app.add_subcommand("snapshot", "inspect a snapshot file");
  snap->add_option("path", snapshot_path, "snapshot file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  if (snap->parsed()) return cmd_snapshot(snapshot_path, std::cout, std::cerr);

  RunConfig cfg;
  try {
    cfg = config_path.empty() ? parse_config("") : load_config(config_path);
  } catch (const ricci::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  if (seed) cfg.seed = seed;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (jobs) cfg.jobs = jobs;

  try {
    return run->parsed() ? cmd_run(cfg, std::cout) : cmd_verify(cfg, std::cout);
  } catch (const ricci::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kSolverFailure;
  }
}
