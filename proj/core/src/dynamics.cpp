#include "kdvlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "kdvlab/errors.hpp"
#include "kdvlab/rng.hpp"

namespace kdvlab {

NoiseSpec::NoiseSpec(std::vector<double> coeffs, double C, double m)
    : b(std::move(coeffs)), decay_c(C), decay_m(m) {
  if (b.empty()) throw ConfigError("NoiseSpec: empty coefficient list");
  for (size_t j = 0; j < b.size(); ++j) {
    if (b[j] == 0.0)
      throw ConfigError("NoiseSpec: b_" + std::to_string(j + 1) + " must be nonzero");
    const double bound = C * std::pow(static_cast<double>(j + 1), -m);
    if (std::abs(b[j]) > bound * (1 + 1e-12))
      throw ConfigError("NoiseSpec: |b_" + std::to_string(j + 1) +
                        "| violates the declared decay bound");
  }
}

NoiseSpec NoiseSpec::exp_profile(int S, double c, double gamma) {
  if (S < 1 || c <= 0 || gamma < 0) throw ConfigError("NoiseSpec::exp_profile: bad parameters");
  std::vector<double> coeffs(static_cast<size_t>(S));
  for (int j = 1; j <= S; ++j) coeffs[j - 1] = c * std::exp(-gamma * j);
  // e^{-gamma j} <= e^{-gamma} * j^{-2} * sup_j j^2 e^{-gamma (j-1)}; just
  // declare the tightest poly-2 envelope of the actual coefficients.
  double C = 0;
  for (int j = 1; j <= S; ++j) C = std::max(C, std::abs(coeffs[j - 1]) * j * j);
  return NoiseSpec(std::move(coeffs), C, 2.0);
}

NoiseSpec NoiseSpec::poly_profile(int S, double c, double m) {
  if (S < 1 || c <= 0 || m < 0) throw ConfigError("NoiseSpec::poly_profile: bad parameters");
  std::vector<double> coeffs(static_cast<size_t>(S));
  for (int j = 1; j <= S; ++j) coeffs[j - 1] = c * std::pow(static_cast<double>(j), -m);
  return NoiseSpec(std::move(coeffs), c, m);
}

double NoiseSpec::operator()(int j) const {
  if (j < 1 || j > modes()) throw DomainError("NoiseSpec: mode out of range");
  return b[static_cast<size_t>(j - 1)];
}

double NoiseSpec::max_b() const {
  double m = 0;
  for (double v : b) m = std::max(m, std::abs(v));
  return m;
}

namespace {

// Per-pair linear propagator over a step h: damping e^{-nu s^2 h} composed
// with rotation by s^3 h (when the dispersion term is on).
struct PairPropagator {
  std::vector<Mat2> full, half;
};

PairPropagator make_propagator(int S, double nu, bool dispersion, double h) {
  PairPropagator p;
  p.full.resize(static_cast<size_t>(S));
  p.half.resize(static_cast<size_t>(S));
  for (int s = 1; s <= S; ++s) {
    const double s2 = static_cast<double>(s) * s;
    const double s3 = s2 * s;
    auto factor = [&](double t) {
      const double damp = std::exp(-nu * s2 * t);
      Mat2 m = dispersion ? Mat2::rotation(s3 * t) : Mat2::identity();
      return damp * m;
    };
    p.full[s - 1] = factor(h);
    p.half[s - 1] = factor(0.5 * h);
  }
  return p;
}

inline void apply_pairs(const std::vector<Mat2>& m, FourierField& u) {
  for (int s = 1; s <= u.S; ++s) {
    const Mat2& a = m[static_cast<size_t>(s - 1)];
    const double x = u.plus(s), y = u.minus(s);
    u.plus(s) = a.a00 * x + a.a01 * y;
    u.minus(s) = a.a10 * x + a.a11 * y;
  }
}

void axpy(FourierField& y, double a, const FourierField& x) {
  for (size_t i = 0; i < y.c.size(); ++i) y.c[i] += a * x.c[i];
}

// One deterministic step: exact linear propagation when the nonlinearity is
// off, integrating-factor RK4 otherwise.
void deterministic_step(FourierField& u, const PairPropagator& prop, bool nonlinearity,
                        double h) {
  if (!nonlinearity) {
    apply_pairs(prop.full, u);
    return;
  }
  const FourierField n1 = kdv_nonlinearity(u);

  FourierField s2 = u;
  axpy(s2, 0.5 * h, n1);
  apply_pairs(prop.half, s2);
  const FourierField n2 = kdv_nonlinearity(s2);

  FourierField s3 = u;
  apply_pairs(prop.half, s3);
  axpy(s3, 0.5 * h, n2);
  const FourierField n3 = kdv_nonlinearity(s3);

  FourierField s4 = u;
  apply_pairs(prop.full, s4);
  FourierField n3h = n3;
  apply_pairs(prop.half, n3h);
  axpy(s4, h, n3h);
  const FourierField n4 = kdv_nonlinearity(s4);

  // u+ = E2 u + h/6 (E2 n1 + 2 E1 (n2 + n3) + n4)
  FourierField acc = n1;
  apply_pairs(prop.full, acc);
  FourierField mid = n2;
  axpy(mid, 1.0, n3);
  apply_pairs(prop.half, mid);
  axpy(acc, 2.0, mid);
  axpy(acc, 1.0, n4);

  apply_pairs(prop.full, u);
  axpy(u, h / 6.0, acc);
}

}  // namespace

TrajectoryRecord kdv_spde_trajectory(const FourierField& u0, const SpdeConfig& cfg,
                                     const NoiseSpec& noise, const BirkhoffBackend& backend,
                                     int path) {
  if (cfg.nu < 0) throw ConfigError("spde: nu must be >= 0");
  if (cfg.tau_grid.empty()) throw ConfigError("spde: empty record grid");
  if (!std::is_sorted(cfg.tau_grid.begin(), cfg.tau_grid.end()) || cfg.tau_grid.front() < 0)
    throw ConfigError("spde: record grid must be sorted and nonnegative");
  if (cfg.noise && noise.modes() < cfg.S)
    throw ConfigError("spde: noise spec shorter than field truncation");
  if (backend.n_pairs() > cfg.S)
    throw ConfigError("spde: backend retains more pairs than the field truncation");

  const double dt = cfg.dt_or_default();
  const double time_scale = cfg.nu > 0 ? 1.0 / cfg.nu : 1.0;  // record grid is slow time

  FourierField u = u0;
  if (u.S != cfg.S) {
    FourierField padded(cfg.S);
    for (int j = 1; j <= std::min(u.S, cfg.S); ++j) {
      padded.plus(j) = u.plus(j);
      padded.minus(j) = u.minus(j);
    }
    u = padded;
  }

  TrajectoryRecord rec;
  rec.path = path;

  const PairPropagator prop_full = make_propagator(cfg.S, cfg.nu, cfg.dispersion, dt);

  auto noise_amp = [&](int s, double h) -> double {
    if (!cfg.noise || cfg.nu == 0.0) return 0.0;
    const double s2 = static_cast<double>(s) * s;
    const double x = 2.0 * cfg.nu * s2 * h;
    // b_s sqrt(nu (1 - e^{-2 nu s^2 h}) / (2 nu s^2)), stable for small x.
    return noise(s) * std::sqrt(-std::expm1(-x) / (2.0 * s2));
  };
  std::vector<double> amp_full(static_cast<size_t>(cfg.S));
  for (int s = 1; s <= cfg.S; ++s) amp_full[s - 1] = noise_amp(s, dt);

  auto record_snapshot = [&](double t_fast) {
    Snapshot snap;
    snap.tau = cfg.nu > 0 ? t_fast * cfg.nu : t_fast;
    snap.I = backend.actions_of_field(u);
    if (backend.has_angles()) snap.phi = angles(backend.forward(u));
    for (int m = 0; m < 4; ++m) snap.norms[static_cast<size_t>(m)] = sobolev_norm(u, m);
    if (cfg.record_fields) snap.u = u;
    rec.snaps.push_back(std::move(snap));
  };

  double t = 0;
  std::uint64_t step_index = 0;
  for (double tau_rec : cfg.tau_grid) {
    const double t_target = tau_rec * time_scale;
    while (t < t_target - 1e-12 * std::max(1.0, t_target)) {
      const double h = std::min(dt, t_target - t);
      const bool full = std::abs(h - dt) < 1e-15 * dt;
      const PairPropagator prop_h =
          full ? prop_full : make_propagator(cfg.S, cfg.nu, cfg.dispersion, h);

      deterministic_step(u, prop_h, cfg.nonlinearity, h);
      if (cfg.noise && cfg.nu > 0) {
        for (int s = 1; s <= cfg.S; ++s) {
          const double g = full ? amp_full[s - 1] : noise_amp(s, h);
          const GaussPair xi = gauss_pair(
              cfg.seed, stream_id(StreamPurpose::spde_noise, static_cast<std::uint64_t>(path),
                                  static_cast<std::uint64_t>(s)),
              step_index);
          u.plus(s) += g * xi.x;
          u.minus(s) += g * xi.y;
        }
      }
      ++step_index;
      t += h;

      if (sobolev_norm(u, 0) > cfg.blowup_bound) {
        rec.diverged = true;
        rec.diverged_at = cfg.nu > 0 ? t * cfg.nu : t;
        throw DivergenceError("spde: ||u||_0 exceeded " + std::to_string(cfg.blowup_bound) +
                                  " at fast time " + std::to_string(t),
                              rec);
      }
    }
    record_snapshot(t_target);
  }
  return rec;
}

std::vector<TrajectoryRecord> kdv_ensemble(const FourierField& u0, const SpdeConfig& cfg,
                                           const NoiseSpec& noise, const BirkhoffBackend& backend,
                                           int n_paths, int n_threads) {
  if (n_paths < 1) throw ConfigError("ensemble: n_paths must be >= 1");
  std::vector<TrajectoryRecord> out(static_cast<size_t>(n_paths));
  n_threads = std::max(1, std::min(n_threads, n_paths));

  auto run_range = [&](int begin, int stride) {
    for (int p = begin; p < n_paths; p += stride) {
      try {
        out[static_cast<size_t>(p)] = kdv_spde_trajectory(u0, cfg, noise, backend, p);
      } catch (const DivergenceError& e) {
        out[static_cast<size_t>(p)] = e.record;  // tagged, keep going
      }
    }
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

std::vector<double> sde_step(const std::vector<double>& x, const std::vector<double>& drift,
                             const DenseMat& columns, double dt, const std::vector<double>& xi,
                             const std::vector<double>* exp_stiff_dt) {
  const size_t d = x.size();
  if (drift.size() != d) throw DomainError("sde_step: drift dimension mismatch");
  if (columns.rows != static_cast<int>(d) && columns.cols != 0)
    throw DomainError("sde_step: dispersion row dimension mismatch");
  if (static_cast<int>(xi.size()) != columns.cols)
    throw DomainError("sde_step: noise dimension mismatch");
  std::vector<double> y(d);
  const double sq = std::sqrt(dt);
  for (size_t i = 0; i < d; ++i) {
    double acc = x[i] + drift[i] * dt;
    for (int c = 0; c < columns.cols; ++c)
      acc += sq * columns(static_cast<int>(i), c) * xi[static_cast<size_t>(c)];
    if (exp_stiff_dt) acc *= (*exp_stiff_dt)[i];
    y[i] = acc;
  }
  return y;
}

std::vector<double> sde_step(
    const std::vector<double>& x,
    const std::function<std::vector<double>(const std::vector<double>&)>& drift,
    const std::function<DenseMat(const std::vector<double>&)>& columns, double dt,
    const std::vector<double>& xi, const std::vector<double>* exp_stiff_dt) {
  return sde_step(x, drift(x), columns(x), dt, xi, exp_stiff_dt);
}

void write_trajectory_jsonl(std::ostream& os, const TrajectoryRecord& rec,
                            const std::string& extra_tags_json) {
  nlohmann::json extra;
  if (!extra_tags_json.empty()) extra = nlohmann::json::parse(extra_tags_json);
  for (const auto& s : rec.snaps) {
    nlohmann::json line;
    line["tau"] = s.tau;
    line["I"] = s.I;
    line["phi"] = s.phi;
    if (s.u) line["u"] = nlohmann::json::parse(field_to_json(*s.u));
    for (auto it = extra.begin(); it != extra.end(); ++it) line[it.key()] = it.value();
    os << line.dump() << "\n";
  }
}

}  // namespace kdvlab
