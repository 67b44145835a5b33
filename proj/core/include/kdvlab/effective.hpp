#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "kdvlab/averaging.hpp"
#include "kdvlab/birkhoff.hpp"
#include "kdvlab/dynamics.hpp"

namespace kdvlab {

// Slow SDE in pair coordinates,
//   dv = ( stiff * v + R0(v) ) dtau + C(v) dbeta,
// with stiff_k = -k^2 (the Fourier-image of the Laplacian) and R0 everything
// the averaged drift adds on top of the heat part, Ito correction included.
// R0 is one order smoother than the heat part, so it can be stepped
// explicitly. C(v) are the quadrature noise columns; their Gram matrix is the
// averaged diffusion at v.
struct EffectiveSystem {
  std::shared_ptr<const BirkhoffBackend> backend;
  NoiseSpec noise;
  TorusQuadrature quad;
  PerturbationFields fields;
  std::vector<double> stiff_diag;  // per pair, -k^2 unless overridden

  int n_pairs() const { return fields.N; }

  std::vector<double> drift(const BirkhoffVector& v) const;  // <P1 + P2>(v)
  std::vector<double> r1(const BirkhoffVector& v) const;
  std::vector<double> r2(const BirkhoffVector& v) const;
  // drift(v) - stiff * v; split consistency is the defining invariant.
  std::vector<double> drift_residual(const BirkhoffVector& v) const;
  DenseMat noise_columns(const BirkhoffVector& v) const;
  AveragedDiffusion diffusion(const BirkhoffVector& v) const;
};

// Requires inverse + Jacobian; Hessians fall back to central differences
// when the backend lacks them. Missing capabilities throw CapabilityError.
EffectiveSystem assemble_effective(std::shared_ptr<const BirkhoffBackend> backend,
                                   const NoiseSpec& noise, TorusQuadrature quad,
                                   bool force_numeric_derivatives = false);

struct EffectiveTrajectory {
  std::uint64_t path = 0;
  bool diverged = false;   // non-finite state; v holds the last good samples
  double diverged_at = 0;
  std::vector<double> tau;
  std::vector<BirkhoffVector> v;

  std::vector<ActionVector> actions_series() const;
};

// Semi-implicit stepping: Euler-Maruyama on R0 and the noise, then the exact
// factor exp(stiff * h) on the whole update. Noise columns are rebuilt from
// the current state every step. One stream per (path, column pair), so the
// output is a pure function of (v0, seed, path).
EffectiveTrajectory integrate_effective(const EffectiveSystem& sys, const BirkhoffVector& v0,
                                        const std::vector<double>& tau_grid, double dt,
                                        std::uint64_t seed, std::uint64_t path = 0);

// Independent paths; bit-identical for equal seeds under any thread count.
std::vector<EffectiveTrajectory> effective_ensemble(const EffectiveSystem& sys,
                                                    const BirkhoffVector& v0,
                                                    const std::vector<double>& tau_grid, double dt,
                                                    std::uint64_t seed, int n_paths,
                                                    int n_threads = 1);

struct ContractionCurve {
  std::vector<double> tau;
  std::vector<double> mean_sq_gap;  // E |v_a(tau) - v_b(tau)|_0^2
  // Least-squares slope of log(mean_sq_gap) vs tau over the positive tail;
  // 0 when the curve is identically zero. Logged, never asserted against.
  double gronwall_slope = 0;
  bool identically_zero = false;
};

// Strong-solution comparison: both arms of every path consume the identical
// noise stream, so v0a == v0b forces bitwise-equal trajectories and the gap
// curve is exactly zero.
ContractionCurve contraction_test(const EffectiveSystem& sys, const BirkhoffVector& v0a,
                                  const BirkhoffVector& v0b, double T, double dt,
                                  std::uint64_t seed, int n_paths, int n_threads = 1);

// Fast-slow dynamics in pair coordinates,
//   dv_k = ( W_k/nu J v_k + P_k(v) ) dtau + sum_l B_kl(v) dbeta_l,
// with the rotation applied exactly per step and P, B explicit. P here is the
// raw (un-averaged) perturbation. rotation_on = false freezes the fast phase
// (the W = 0 surrogate used as a negative control for the averaging study);
// rotation_on = true requires backend frequencies.
EffectiveTrajectory integrate_fast_v(const EffectiveSystem& sys, const BirkhoffVector& v0,
                                     double nu, const std::vector<double>& tau_grid, double dt,
                                     std::uint64_t seed, std::uint64_t path = 0,
                                     bool rotation_on = true);

std::vector<EffectiveTrajectory> fast_v_ensemble(const EffectiveSystem& sys,
                                                 const BirkhoffVector& v0, double nu,
                                                 const std::vector<double>& tau_grid, double dt,
                                                 std::uint64_t seed, int n_paths,
                                                 bool rotation_on = true, int n_threads = 1);

// JSONL bridge: same snapshot layout as the field-space trajectories, with
// norms computed from backend.inverse(v).
TrajectoryRecord to_trajectory_record(const EffectiveSystem& sys, const EffectiveTrajectory& tr);

}  // namespace kdvlab
