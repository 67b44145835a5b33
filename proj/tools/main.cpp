#include <cstdint>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kdvlab/config.hpp"
#include "kdvlab/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"kdvlab: damped-driven KdV averaging laboratory"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "execute an experiment described by a TOML config");
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  bool validate_only = false;
  run->add_option("config", config_path, "experiment config (TOML)")->required();
  run->add_option("--out", out_dir, "override the output directory");
  auto* seed_opt = run->add_option("--seed", seed, "override the seed");
  run->add_option("--threads", threads, "override the worker thread count");
  run->add_flag("--validate-only", validate_only, "parse and validate the config, then exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // bad flags are config errors
  }

  try {
    kdvlab::ExperimentConfig cfg = kdvlab::ExperimentConfig::from_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (threads > 0) cfg.threads = threads;
    cfg.validate();
    if (validate_only) {
      std::ostringstream hash;
      hash << std::hex << std::setw(16) << std::setfill('0') << cfg.config_hash();
      std::cout << "config ok: mode=" << cfg.mode << " hash=" << hash.str() << "\n";
      return 0;
    }
    kdvlab::run_config(cfg);
    std::cout << "run complete: " << cfg.out_dir << "\n";
    return 0;
  } catch (const kdvlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const kdvlab::CapabilityError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const kdvlab::IntegrationError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const kdvlab::SpectralResolutionError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
