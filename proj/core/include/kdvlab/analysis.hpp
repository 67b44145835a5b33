#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "kdvlab/averaging.hpp"
#include "kdvlab/birkhoff.hpp"
#include "kdvlab/dynamics.hpp"
#include "kdvlab/effective.hpp"

namespace kdvlab {

// Empirical action law at one recorded time: one ActionVector per path,
// uniform weights.
struct EmpiricalLaw {
  std::vector<ActionVector> samples;

  int n_modes() const;
  std::vector<double> marginal(int k) const;  // k-th action, k >= 1

  // Extraction at a record-grid index; diverged paths are an error (the law
  // at that time does not exist for them).
  static EmpiricalLaw at_time(const std::vector<TrajectoryRecord>& ens, int grid_index);
  static EmpiricalLaw at_time(const std::vector<EffectiveTrajectory>& ens, int grid_index);
};

// Exact 1-Wasserstein distance between uniform empirical laws on the line
// (quantile-integral formula; sizes may differ).
double wasserstein1(std::vector<double> a, std::vector<double> b);

// W1 between the k-th action marginals.
double action_law_distance(const EmpiricalLaw& a, const EmpiricalLaw& b, int k);

// Bootstrap standard error of wasserstein1(a, b) under resampling both sets.
double w1_bootstrap_se(const std::vector<double>& a, const std::vector<double>& b, int n_boot,
                       std::uint64_t seed, std::uint64_t sub = 0);

// Same-law Monte-Carlo floor: mean W1 between random half-splits of one
// sample set. The floor is measured, never assumed.
double same_law_floor(const std::vector<double>& samples, int n_splits, std::uint64_t seed,
                      std::uint64_t sub = 0);

struct ConvergenceArm {
  double nu = 0;
  // d[t][k-1]: per record time, per mode, W1 distance to the effective law
  std::vector<std::vector<double>> d;
  std::vector<std::vector<double>> d_se;
};

struct ConvergenceReport {
  std::vector<double> nu_list;  // decreasing
  std::vector<double> tau_grid;
  int n_modes = 0;
  int n_paths = 0;
  std::vector<ConvergenceArm> arms;
  std::vector<std::vector<double>> floor;  // [t][k-1] same-law floor of the effective law
  // Verdicts at the final record time:
  std::vector<bool> monotone_strict;     // per mode: d strictly decreases along nu_list
  std::vector<bool> monotone_within_se;  // per mode: d[i+1] <= d[i] + 2 * pooled SE
  std::vector<bool> final_below_2floor;  // per mode: d(last nu) <= 2 * floor
  bool all_monotone_strict = false;
  bool all_monotone_within_se = false;
  bool all_final_below_2floor = false;
};

void finalize_report_verdicts(ConvergenceReport& rep);
std::string convergence_report_json(const ConvergenceReport& rep);
// Whitespace table (one row per nu: nu, then d and floor per mode at the
// final time) plus a log-log gnuplot script reading it.
std::string convergence_report_table(const ConvergenceReport& rep);
std::string convergence_plot_script(const ConvergenceReport& rep, const std::string& dat_name);

// Slow-fast averaging study. The fast arms integrate the full field-space
// SPDE at viscosity nu; the reference arm integrates the effective equation
// once. Action laws are compared per mode on the shared slow-time grid.
struct ConvergenceSetup {
  ConvergenceSetup(std::shared_ptr<const BirkhoffBackend> backend_, NoiseSpec noise_,
                   FourierField u0_, TorusQuadrature quad_)
      : backend(std::move(backend_)), noise(std::move(noise_)), u0(std::move(u0_)),
        quad(std::move(quad_)) {}

  std::shared_ptr<const BirkhoffBackend> backend;
  NoiseSpec noise;        // >= S entries
  FourierField u0;        // spde initial data, truncation S
  int S = 8;              // spde resolution
  bool nonlinearity = true;
  double dt_fast = 0;     // fast-time step, 0 -> solver default
  double dt_slow = 1e-3;  // effective-equation step
  TorusQuadrature quad;   // effective-equation quadrature
  AngleVector theta0;     // effective initial angles; empty -> angles of forward(u0)
  double blowup_bound = 50;
  int n_paths = 512;      // per fast arm
  int n_eff_paths = 512;
  int n_floor_splits = 64;
  int n_boot = 200;
  std::uint64_t seed = 0;
  int n_threads = 1;
};

ConvergenceReport convergence_study(const ConvergenceSetup& setup,
                                    const std::vector<double>& nu_list,
                                    const std::vector<double>& tau_grid);

// Same comparison with the fast arms replaced by the pair-space fast-slow
// integrator. rotation_on = false is the W = 0 surrogate: without the fast
// rotation nothing averages, so for a non-equivariant perturbation d(nu)
// stays above the floor (negative control).
ConvergenceReport fast_v_study(const EffectiveSystem& sys, const BirkhoffVector& v0,
                               const std::vector<double>& nu_list,
                               const std::vector<double>& tau_grid, double dt_slow, int n_paths,
                               int n_eff_paths, int n_floor_splits, int n_boot,
                               std::uint64_t seed, bool rotation_on, int n_threads = 1);

// --- angle equidistribution -------------------------------------------------

// Kolmogorov-Smirnov distance between a weighted sample on the circle and
// the uniform law. Convention: samples are first rotated so the weighted
// circular mean sits at pi, then KS is taken on [0, 2pi); a point mass gives
// exactly 0.5. Weights need not be normalized; all-zero weights are an error.
double circular_ks(std::vector<double> angles, std::vector<double> weights);

// Tent profile on [lo, hi] sampled on the grid, scaled so sum f * dtau = 1
// (trapezoid weights).
std::vector<double> tent_weights(const std::vector<double>& tau_grid, double lo, double hi);

struct AngleKsResult {
  std::vector<double> ks;         // per mode
  std::vector<double> resultant;  // length of the weighted circular mean, per mode
  double pooled_weight = 0;       // total pooled weight (paths x grid)
};

// Pools phi_k across paths and record times with time weights f (one entry
// per grid point, sum f * dtau = 1), then applies circular_ks per mode.
AngleKsResult angle_equidistribution(const std::vector<TrajectoryRecord>& ens,
                                     const std::vector<double>& f);

// Pooled-angle histogram (density over [0, 2pi), n_bins uniform bins) for the
// plot artifacts.
std::vector<double> angle_histogram(const std::vector<TrajectoryRecord>& ens,
                                    const std::vector<double>& f, int mode, int n_bins);

// --- occupation and moment diagnostics --------------------------------------

// Empirical E int_0^T chi_{I_k(tau) <= delta} dtau, trapezoid rule on the
// record grid, mean over paths. Monotone non-decreasing in delta.
double occupation_below(const std::vector<EffectiveTrajectory>& ens, double delta, int k);
double occupation_below(const std::vector<TrajectoryRecord>& ens, double delta, int k);

// E exp(sigma ||u||_0^2) at each record time.
std::vector<double> exp_moment_curve(const std::vector<TrajectoryRecord>& ens, double sigma);

double median_of(std::vector<double> xs);

// Least-squares slope of log(y) against log(x); x, y > 0 required.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace kdvlab
