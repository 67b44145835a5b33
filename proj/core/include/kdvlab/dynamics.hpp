#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kdvlab/birkhoff.hpp"
#include "kdvlab/field.hpp"
#include "kdvlab/linalg.hpp"

namespace kdvlab {

// Forcing coefficients b_s with b_s = b_{-s} != 0, stored per pair index.
// Construction validates that every retained b_j is nonzero and satisfies the
// declared decay bound |b_j| <= C j^{-m}.
struct NoiseSpec {
  std::vector<double> b;  // b_j, j = 1..size
  double decay_c = 0, decay_m = 0;

  NoiseSpec(std::vector<double> coeffs, double C, double m);
  static NoiseSpec exp_profile(int S, double c, double gamma);
  static NoiseSpec poly_profile(int S, double c, double m);

  int modes() const { return static_cast<int>(b.size()); }
  double operator()(int j) const;  // b_j, j >= 1
  double max_b() const;
};

struct SpdeConfig {
  double nu = 0.1;
  double dt = 0.0;  // fast-time step; 0 selects the default 0.5 / S^3
  int S = 8;
  bool nonlinearity = true;
  bool dispersion = true;  // the u_xxx term
  bool noise = true;
  double blowup_bound = 50.0;        // divergence when ||u||_0 exceeds this
  std::vector<double> tau_grid;      // record times, slow time (fast when nu == 0)
  bool record_fields = false;
  std::uint64_t seed = 0;

  double dt_or_default() const { return dt > 0 ? dt : 0.5 / (double(S) * S * S); }
};

struct Snapshot {
  double tau = 0;
  ActionVector I;
  AngleVector phi;                    // empty when the backend has no angles
  std::array<double, 4> norms{};      // ||u||_m for m = 0..3
  std::optional<FourierField> u;
};

struct TrajectoryRecord {
  int path = 0;
  bool diverged = false;
  double diverged_at = 0;
  std::vector<Snapshot> snaps;
};

struct DivergenceError : IntegrationError {
  TrajectoryRecord record;
  DivergenceError(std::string msg, TrajectoryRecord rec)
      : IntegrationError(std::move(msg)), record(std::move(rec)) {}
};

// Damped-driven KdV   u_t - nu u_xx + u_xxx - 6 u u_x = sqrt(nu) eta
// integrated in fast time. Per mode pair the linear flow (rotation at rate
// s^3, damping nu s^2) plus the additive noise is advanced by the exact
// Ornstein-Uhlenbeck update; the dealiased nonlinearity enters through
// explicit integrating-factor RK4 stages. With the nonlinearity off the
// scheme samples the linear SPDE exactly at the record times.
TrajectoryRecord kdv_spde_trajectory(const FourierField& u0, const SpdeConfig& cfg,
                                     const NoiseSpec& noise, const BirkhoffBackend& backend,
                                     int path = 0);

// Independent paths, one counter-based stream per (path, mode); results are
// bit-identical for equal seeds regardless of n_threads. Divergent paths are
// tagged, not fatal.
std::vector<TrajectoryRecord> kdv_ensemble(const FourierField& u0, const SpdeConfig& cfg,
                                           const NoiseSpec& noise, const BirkhoffBackend& backend,
                                           int n_paths, int n_threads = 1);

// Plain Euler-Maruyama update x + f dt + sqrt(dt) * columns * xi, with an
// optional exact exponential factor for a declared diagonal stiff part
// (applied to the whole update, matching the effective-equation stepper).
std::vector<double> sde_step(const std::vector<double>& x, const std::vector<double>& drift,
                             const DenseMat& columns, double dt, const std::vector<double>& xi,
                             const std::vector<double>* exp_stiff_dt = nullptr);
std::vector<double> sde_step(
    const std::vector<double>& x,
    const std::function<std::vector<double>(const std::vector<double>&)>& drift,
    const std::function<DenseMat(const std::vector<double>&)>& columns, double dt,
    const std::vector<double>& xi, const std::vector<double>* exp_stiff_dt = nullptr);

// One JSON object per snapshot: {"tau": t, "I": [...], "phi": [...]}, plus
// "u" when fields are recorded and any extra tags (e.g. {"system":
// "effective"}). Key order and number formatting are deterministic.
void write_trajectory_jsonl(std::ostream& os, const TrajectoryRecord& rec,
                            const std::string& extra_tags_json = "");

}  // namespace kdvlab
