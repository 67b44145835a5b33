#include "kdvlab/effective.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "kdvlab/errors.hpp"
#include "kdvlab/field.hpp"
#include "kdvlab/rng.hpp"

namespace kdvlab {

namespace {

bool all_finite(const BirkhoffVector& v) {
  for (const Pair& q : v.p)
    if (!std::isfinite(q.x) || !std::isfinite(q.y)) return false;
  return true;
}

void check_grid(const std::vector<double>& tau_grid) {
  if (tau_grid.empty()) throw ConfigError("integrate: empty record grid");
  double prev = -1e-300;
  for (double t : tau_grid) {
    if (!(t >= 0)) throw ConfigError("integrate: record times must be >= 0");
    if (t < prev) throw ConfigError("integrate: record times must be sorted");
    prev = t;
  }
}

}  // namespace

std::vector<double> EffectiveSystem::drift(const BirkhoffVector& v) const {
  return effective_drift(fields.p_total, v, quad);
}

std::vector<double> EffectiveSystem::r1(const BirkhoffVector& v) const {
  return effective_drift(fields.p1, v, quad);
}

std::vector<double> EffectiveSystem::r2(const BirkhoffVector& v) const {
  return effective_drift(fields.p2, v, quad);
}

std::vector<double> EffectiveSystem::drift_residual(const BirkhoffVector& v) const {
  std::vector<double> d = drift(v);
  for (int k = 1; k <= n_pairs(); ++k) {
    const double s = stiff_diag[static_cast<size_t>(k - 1)];
    d[2 * static_cast<size_t>(k - 1)] -= s * v[k].x;
    d[2 * static_cast<size_t>(k - 1) + 1] -= s * v[k].y;
  }
  return d;
}

DenseMat EffectiveSystem::noise_columns(const BirkhoffVector& v) const {
  return dispersion_columns(fields.b, v, quad);
}

AveragedDiffusion EffectiveSystem::diffusion(const BirkhoffVector& v) const {
  return averaged_diffusion(fields.b, v, quad);
}

EffectiveSystem assemble_effective(std::shared_ptr<const BirkhoffBackend> backend,
                                   const NoiseSpec& noise, TorusQuadrature quad,
                                   bool force_numeric_derivatives) {
  if (!backend) throw ConfigError("assemble_effective: null backend");
  if (quad.N != backend->n_pairs())
    throw ConfigError("assemble_effective: quadrature dimension != n_pairs");
  PerturbationFields fields =
      build_perturbation_fields(backend, noise, force_numeric_derivatives);
  std::vector<double> stiff(static_cast<size_t>(fields.N));
  for (int k = 1; k <= fields.N; ++k)
    stiff[static_cast<size_t>(k - 1)] = -static_cast<double>(k) * k;
  return EffectiveSystem{backend, noise, std::move(quad), std::move(fields), std::move(stiff)};
}

std::vector<ActionVector> EffectiveTrajectory::actions_series() const {
  std::vector<ActionVector> out;
  out.reserve(v.size());
  for (const BirkhoffVector& w : v) out.push_back(actions(w));
  return out;
}

EffectiveTrajectory integrate_effective(const EffectiveSystem& sys, const BirkhoffVector& v0,
                                        const std::vector<double>& tau_grid, double dt,
                                        std::uint64_t seed, std::uint64_t path) {
  check_grid(tau_grid);
  if (!(dt > 0)) throw ConfigError("integrate_effective: dt must be > 0");
  const int N = sys.n_pairs();
  if (v0.n_pairs() != N) throw ConfigError("integrate_effective: v0 dimension != n_pairs");
  if (!all_finite(v0)) throw ConfigError("integrate_effective: v0 not finite");

  const int L = sys.fields.L;
  const int Q = sys.quad.size();
  const size_t n_cols = 2 * static_cast<size_t>(L) * Q;

  EffectiveTrajectory tr;
  tr.path = path;
  tr.tau.reserve(tau_grid.size());
  tr.v.reserve(tau_grid.size());

  BirkhoffVector v = v0;
  double tau = 0;
  std::uint64_t step = 0;
  std::vector<double> xi(n_cols);

  auto one_step = [&](double h) {
    const std::vector<double> resid = sys.drift_residual(v);
    const DenseMat cols = sys.noise_columns(v);
    for (int l = 0; l < L * Q; ++l) {
      const GaussPair g = gauss_pair(
          seed, stream_id(StreamPurpose::effective_noise, path, static_cast<std::uint64_t>(l)),
          step);
      xi[2 * static_cast<size_t>(l)] = g.x;
      xi[2 * static_cast<size_t>(l) + 1] = g.y;
    }
    const double sh = std::sqrt(h);
    for (int k = 0; k < N; ++k) {
      double nx = 0, ny = 0;
      const double* row_x = &cols.a[static_cast<size_t>(2 * k) * n_cols];
      const double* row_y = &cols.a[static_cast<size_t>(2 * k + 1) * n_cols];
      for (size_t c = 0; c < n_cols; ++c) {
        nx += row_x[c] * xi[c];
        ny += row_y[c] * xi[c];
      }
      const double e = std::exp(sys.stiff_diag[static_cast<size_t>(k)] * h);
      Pair& q = v.p[static_cast<size_t>(k)];
      q.x = e * (q.x + h * resid[2 * static_cast<size_t>(k)] + sh * nx);
      q.y = e * (q.y + h * resid[2 * static_cast<size_t>(k) + 1] + sh * ny);
    }
    ++step;
    tau += h;
  };

  for (double target : tau_grid) {
    while (tau < target - 1e-12 * std::max(1.0, target)) {
      one_step(std::min(dt, target - tau));
      if (!all_finite(v)) {
        tr.diverged = true;
        tr.diverged_at = tau;
        return tr;
      }
    }
    tr.tau.push_back(target);
    tr.v.push_back(v);
  }
  return tr;
}

std::vector<EffectiveTrajectory> effective_ensemble(const EffectiveSystem& sys,
                                                    const BirkhoffVector& v0,
                                                    const std::vector<double>& tau_grid, double dt,
                                                    std::uint64_t seed, int n_paths,
                                                    int n_threads) {
  if (n_paths < 1) throw ConfigError("effective_ensemble: n_paths must be >= 1");
  std::vector<EffectiveTrajectory> out(static_cast<size_t>(n_paths));
  n_threads = std::max(1, std::min(n_threads, n_paths));

  auto run_range = [&](int begin, int stride) {
    for (int p = begin; p < n_paths; p += stride)
      out[static_cast<size_t>(p)] =
          integrate_effective(sys, v0, tau_grid, dt, seed, static_cast<std::uint64_t>(p));
  };

  if (n_threads == 1) {
    run_range(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<size_t>(n_threads));
    for (int tix = 0; tix < n_threads; ++tix)
      pool.emplace_back([&, tix] {
        try {
          run_range(tix, n_threads);
        } catch (...) {
          errs[static_cast<size_t>(tix)] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
  }
  return out;
}

ContractionCurve contraction_test(const EffectiveSystem& sys, const BirkhoffVector& v0a,
                                  const BirkhoffVector& v0b, double T, double dt,
                                  std::uint64_t seed, int n_paths, int n_threads) {
  if (!(T > 0)) throw ConfigError("contraction_test: T must be > 0");
  constexpr int n_rec = 33;  // tau = 0 plus 32 uniform points
  std::vector<double> grid(n_rec);
  for (int i = 0; i < n_rec; ++i) grid[static_cast<size_t>(i)] = T * i / (n_rec - 1);

  const auto arm_a = effective_ensemble(sys, v0a, grid, dt, seed, n_paths, n_threads);
  const auto arm_b = effective_ensemble(sys, v0b, grid, dt, seed, n_paths, n_threads);

  ContractionCurve curve;
  curve.tau = grid;
  curve.mean_sq_gap.assign(static_cast<size_t>(n_rec), 0.0);
  std::vector<double> terms(static_cast<size_t>(n_paths));
  for (int i = 0; i < n_rec; ++i) {
    for (int p = 0; p < n_paths; ++p) {
      const auto& a = arm_a[static_cast<size_t>(p)];
      const auto& b = arm_b[static_cast<size_t>(p)];
      if (a.diverged || b.diverged || static_cast<int>(a.v.size()) <= i ||
          static_cast<int>(b.v.size()) <= i)
        throw IntegrationError("contraction_test: path diverged before the horizon");
      BirkhoffVector w = a.v[static_cast<size_t>(i)];
      for (int k = 1; k <= w.n_pairs(); ++k) {
        w[k].x -= b.v[static_cast<size_t>(i)][k].x;
        w[k].y -= b.v[static_cast<size_t>(i)][k].y;
      }
      const double nrm = weighted_norm(w, 0.0);
      terms[static_cast<size_t>(p)] = nrm * nrm / n_paths;
    }
    curve.mean_sq_gap[static_cast<size_t>(i)] = pairwise_sum(terms);
  }

  // slope of log gap over the strictly positive samples (tau > 0)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int i = 1; i < n_rec; ++i) {
    const double g = curve.mean_sq_gap[static_cast<size_t>(i)];
    if (g <= 0) continue;
    const double x = curve.tau[static_cast<size_t>(i)], y = std::log(g);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt >= 2 && sxx * cnt - sx * sx > 0)
    curve.gronwall_slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  curve.identically_zero = true;
  for (double g : curve.mean_sq_gap)
    if (g != 0) curve.identically_zero = false;
  return curve;
}

EffectiveTrajectory integrate_fast_v(const EffectiveSystem& sys, const BirkhoffVector& v0,
                                     double nu, const std::vector<double>& tau_grid, double dt,
                                     std::uint64_t seed, std::uint64_t path, bool rotation_on) {
  check_grid(tau_grid);
  if (!(dt > 0)) throw ConfigError("integrate_fast_v: dt must be > 0");
  if (!(nu > 0)) throw ConfigError("integrate_fast_v: nu must be > 0");
  const int N = sys.n_pairs();
  if (v0.n_pairs() != N) throw ConfigError("integrate_fast_v: v0 dimension != n_pairs");
  if (!all_finite(v0)) throw ConfigError("integrate_fast_v: v0 not finite");

  std::vector<double> W(static_cast<size_t>(N), 0.0);
  if (rotation_on) W = sys.backend->frequencies();

  const int L = sys.fields.L;
  EffectiveTrajectory tr;
  tr.path = path;

  BirkhoffVector v = v0;
  double tau = 0;
  std::uint64_t step = 0;
  std::vector<double> xi(2 * static_cast<size_t>(L));

  auto one_step = [&](double h) {
    const std::vector<double> p = sys.fields.p_total.eval(v);
    const auto B = sys.fields.b.eval(v);
    for (int l = 0; l < L; ++l) {
      const GaussPair g = gauss_pair(
          seed, stream_id(StreamPurpose::fast_noise, path, static_cast<std::uint64_t>(l)), step);
      xi[2 * static_cast<size_t>(l)] = g.x;
      xi[2 * static_cast<size_t>(l) + 1] = g.y;
    }
    const double sh = std::sqrt(h);
    for (int k = 0; k < N; ++k) {
      double nx = 0, ny = 0;
      for (int l = 0; l < L; ++l) {
        const Mat2& blk = B[static_cast<size_t>(k)][static_cast<size_t>(l)];
        nx += blk.a00 * xi[2 * static_cast<size_t>(l)] + blk.a01 * xi[2 * static_cast<size_t>(l) + 1];
        ny += blk.a10 * xi[2 * static_cast<size_t>(l)] + blk.a11 * xi[2 * static_cast<size_t>(l) + 1];
      }
      Pair& q = v.p[static_cast<size_t>(k)];
      const double ux = q.x + h * p[2 * static_cast<size_t>(k)] + sh * nx;
      const double uy = q.y + h * p[2 * static_cast<size_t>(k) + 1] + sh * ny;
      const double ang = W[static_cast<size_t>(k)] * h / nu;
      const double c = std::cos(ang), s = std::sin(ang);
      q.x = c * ux - s * uy;
      q.y = s * ux + c * uy;
    }
    ++step;
    tau += h;
  };

  for (double target : tau_grid) {
    while (tau < target - 1e-12 * std::max(1.0, target)) {
      one_step(std::min(dt, target - tau));
      if (!all_finite(v)) {
        tr.diverged = true;
        tr.diverged_at = tau;
        return tr;
      }
    }
    tr.tau.push_back(target);
    tr.v.push_back(v);
  }
  return tr;
}

std::vector<EffectiveTrajectory> fast_v_ensemble(const EffectiveSystem& sys,
                                                 const BirkhoffVector& v0, double nu,
                                                 const std::vector<double>& tau_grid, double dt,
                                                 std::uint64_t seed, int n_paths, bool rotation_on,
                                                 int n_threads) {
  if (n_paths < 1) throw ConfigError("fast_v_ensemble: n_paths must be >= 1");
  std::vector<EffectiveTrajectory> out(static_cast<size_t>(n_paths));
  n_threads = std::max(1, std::min(n_threads, n_paths));

  auto run_range = [&](int begin, int stride) {
    for (int p = begin; p < n_paths; p += stride)
      out[static_cast<size_t>(p)] = integrate_fast_v(sys, v0, nu, tau_grid, dt, seed,
                                                     static_cast<std::uint64_t>(p), rotation_on);
  };

  if (n_threads == 1) {
    run_range(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<size_t>(n_threads));
    for (int tix = 0; tix < n_threads; ++tix)
      pool.emplace_back([&, tix] {
        try {
          run_range(tix, n_threads);
        } catch (...) {
          errs[static_cast<size_t>(tix)] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
  }
  return out;
}

TrajectoryRecord to_trajectory_record(const EffectiveSystem& sys, const EffectiveTrajectory& tr) {
  TrajectoryRecord rec;
  rec.path = static_cast<int>(tr.path);
  rec.diverged = tr.diverged;
  rec.diverged_at = tr.diverged_at;
  rec.snaps.reserve(tr.v.size());
  for (size_t i = 0; i < tr.v.size(); ++i) {
    Snapshot s;
    s.tau = tr.tau[i];
    s.I = actions(tr.v[i]);
    s.phi = angles(tr.v[i]);
    const FourierField u = sys.backend->inverse(tr.v[i]);
    for (int m = 0; m < 4; ++m) s.norms[static_cast<size_t>(m)] = sobolev_norm(u, m);
    rec.snaps.push_back(std::move(s));
  }
  return rec;
}

}  // namespace kdvlab
