#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "kdvlab/birkhoff.hpp"
#include "kdvlab/dynamics.hpp"
#include "kdvlab/field.hpp"
#include "kdvlab/toml.hpp"

#include "kdvlab/averaging.hpp"

namespace kdvlab {

// Experiment description, schema version 1. Parsed from TOML, validated
// against the capability matrix of the chosen mode, and re-serializable in a
// canonical form whose hash identifies the run.
struct ExperimentConfig {
  int schema_version = 1;
  std::string mode = "spde";  // spde | effective | convergence | equidistribution | diagnostics

  // [backend]
  std::string backend_name = "linear";  // linear | synthetic | hill
  int N = 2;
  double synthetic_eps = 0.05;
  int hill_modes_factor = 4;

  // [run]
  int S = 8;
  double nu = 0.1;
  std::vector<double> nu_list;  // convergence arms, strictly decreasing
  bool nonlinearity = true;
  double dt_fast = 0;  // 0 -> solver default
  double dt_slow = 1e-3;
  double blowup_bound = 50;
  int paths = 8;
  int eff_paths = 0;  // 0 -> paths
  std::vector<double> tau_grid;  // explicit grid wins over tau_end/records
  double tau_end = 1.0;
  int records = 10;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = "out";
  bool record_fields = false;

  // [noise]
  std::string noise_profile = "exp";  // exp | poly
  double noise_c = 0.5;
  double noise_gamma = 0.7;
  double noise_m = 3.0;

  // [initial]
  std::string init_kind = "pairs";  // zero | pairs | decay
  std::vector<double> init_amplitudes = {0.3};
  std::vector<double> init_phases;  // empty -> zeros
  double init_amp = 0.1;
  double init_p = 2.0;

  // [quadrature]
  std::string quad_kind = "auto";  // auto | tensor | lattice | mc
  int quad_m = 16;
  int quad_count = 8192;

  // [analysis]
  double window_lo = 0.25, window_hi = 1.0;  // mollifier support, slow time
  std::vector<double> deltas = {0.1, 0.01, 0.001};
  int floor_splits = 64;
  int n_boot = 200;
  std::vector<double> theta0;  // effective initial angles; empty -> from u0

  static ExperimentConfig from_toml(const toml::Table& t);
  static ExperimentConfig from_file(const std::string& path);

  // Schema and capability validation; throws ConfigError.
  void validate() const;

  // Deterministic full serialization of the resolved config; its FNV-1a hash
  // names the run in the manifest.
  std::string canonical_toml() const;
  std::uint64_t config_hash() const;

  std::shared_ptr<BirkhoffBackend> make_backend() const;
  NoiseSpec make_noise() const;
  FourierField make_u0() const;
  TorusQuadrature make_quadrature() const;
  std::vector<double> make_tau_grid() const;
  int eff_paths_or_default() const { return eff_paths > 0 ? eff_paths : paths; }
};

// Runs the experiment, writing manifest.json and the mode's artifacts into
// out_dir. Identical configs produce byte-identical artifacts. Throws
// ConfigError for schema problems and IntegrationError when a path fails;
// the CLI maps these to exit codes 2 and 3.
void run_config(const ExperimentConfig& cfg);

}  // namespace kdvlab
