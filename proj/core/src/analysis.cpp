#include "kdvlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kdvlab/errors.hpp"
#include "kdvlab/rng.hpp"

namespace kdvlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a;
}

// Composite trapezoid weights for a (possibly non-uniform) sorted grid.
std::vector<double> trapezoid_weights(const std::vector<double>& grid) {
  const size_t n = grid.size();
  std::vector<double> w(n, 0.0);
  if (n < 2) return w;
  for (size_t i = 0; i + 1 < n; ++i) {
    const double h = grid[i + 1] - grid[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}
}  // namespace

int EmpiricalLaw::n_modes() const {
  return samples.empty() ? 0 : static_cast<int>(samples.front().size());
}

std::vector<double> EmpiricalLaw::marginal(int k) const {
  if (samples.empty()) throw DomainError("EmpiricalLaw: empty law");
  if (k < 1 || k > n_modes()) throw DomainError("EmpiricalLaw: mode index out of range");
  std::vector<double> xs;
  xs.reserve(samples.size());
  for (const ActionVector& I : samples) {
    const double v = I[static_cast<size_t>(k - 1)];
    if (!std::isfinite(v)) throw DomainError("EmpiricalLaw: non-finite sample");
    xs.push_back(v);
  }
  return xs;
}

EmpiricalLaw EmpiricalLaw::at_time(const std::vector<TrajectoryRecord>& ens, int grid_index) {
  EmpiricalLaw law;
  law.samples.reserve(ens.size());
  for (const TrajectoryRecord& r : ens) {
    if (r.diverged || static_cast<int>(r.snaps.size()) <= grid_index)
      throw IntegrationError("law extraction: path " + std::to_string(r.path) +
                             " diverged before the requested time");
    law.samples.push_back(r.snaps[static_cast<size_t>(grid_index)].I);
  }
  if (law.samples.empty()) throw DomainError("law extraction: empty ensemble");
  return law;
}

EmpiricalLaw EmpiricalLaw::at_time(const std::vector<EffectiveTrajectory>& ens, int grid_index) {
  EmpiricalLaw law;
  law.samples.reserve(ens.size());
  for (const EffectiveTrajectory& r : ens) {
    if (r.diverged || static_cast<int>(r.v.size()) <= grid_index)
      throw IntegrationError("law extraction: path " + std::to_string(r.path) +
                             " diverged before the requested time");
    law.samples.push_back(actions(r.v[static_cast<size_t>(grid_index)]));
  }
  if (law.samples.empty()) throw DomainError("law extraction: empty ensemble");
  return law;
}

double wasserstein1(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("wasserstein1: empty sample set");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const size_t n = a.size(), m = b.size();
  // integral of |F_a^{-1} - F_b^{-1}| over (0, 1); quantile breaks compared
  // exactly as integers scaled by n*m
  size_t i = 0, j = 0;
  unsigned long long pos = 0;  // current quantile * n * m
  const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(m));
  double acc = 0;
  while (i < n && j < m) {
    const unsigned long long ca = static_cast<unsigned long long>(i + 1) * m;
    const unsigned long long cb = static_cast<unsigned long long>(j + 1) * n;
    const unsigned long long nxt = std::min(ca, cb);
    acc += static_cast<double>(nxt - pos) * scale * std::abs(a[i] - b[j]);
    pos = nxt;
    if (ca == nxt) ++i;
    if (cb == nxt) ++j;
  }
  return acc;
}

double action_law_distance(const EmpiricalLaw& a, const EmpiricalLaw& b, int k) {
  return wasserstein1(a.marginal(k), b.marginal(k));
}

double w1_bootstrap_se(const std::vector<double>& a, const std::vector<double>& b, int n_boot,
                       std::uint64_t seed, std::uint64_t sub) {
  if (a.empty() || b.empty()) throw DomainError("bootstrap: empty sample set");
  if (n_boot < 2) throw ConfigError("bootstrap: n_boot must be >= 2");
  CounterRng rng(seed, stream_id(StreamPurpose::analysis, 1, sub));
  std::vector<double> ra(a.size()), rb(b.size()), d(static_cast<size_t>(n_boot));
  for (int t = 0; t < n_boot; ++t) {
    for (double& x : ra) x = a[static_cast<size_t>(rng.uniform() * a.size()) % a.size()];
    for (double& x : rb) x = b[static_cast<size_t>(rng.uniform() * b.size()) % b.size()];
    d[static_cast<size_t>(t)] = wasserstein1(ra, rb);
  }
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n_boot;
  double ss = 0;
  for (double x : d) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n_boot - 1));
}

double same_law_floor(const std::vector<double>& samples, int n_splits, std::uint64_t seed,
                      std::uint64_t sub) {
  const size_t n = samples.size();
  if (n < 4) throw DomainError("same_law_floor: need at least 4 samples");
  if (n_splits < 1) throw ConfigError("same_law_floor: n_splits must be >= 1");
  CounterRng rng(seed, stream_id(StreamPurpose::analysis, 2, sub));
  std::vector<size_t> idx(n);
  std::vector<double> h1(n / 2), h2(n - n / 2), ds(static_cast<size_t>(n_splits));
  for (int s = 0; s < n_splits; ++s) {
    std::iota(idx.begin(), idx.end(), size_t{0});
    for (size_t i = n - 1; i > 0; --i)
      std::swap(idx[i], idx[static_cast<size_t>(rng.uniform() * (i + 1)) % (i + 1)]);
    for (size_t i = 0; i < h1.size(); ++i) h1[i] = samples[idx[i]];
    for (size_t i = 0; i < h2.size(); ++i) h2[i] = samples[idx[h1.size() + i]];
    ds[static_cast<size_t>(s)] = wasserstein1(h1, h2);
  }
  return std::accumulate(ds.begin(), ds.end(), 0.0) / n_splits;
}

// ---------------------------------------------------------------------------

void finalize_report_verdicts(ConvergenceReport& rep) {
  const int K = rep.n_modes;
  const int A = static_cast<int>(rep.arms.size());
  const int T = static_cast<int>(rep.tau_grid.size());
  rep.monotone_strict.assign(static_cast<size_t>(K), false);
  rep.monotone_within_se.assign(static_cast<size_t>(K), false);
  rep.final_below_2floor.assign(static_cast<size_t>(K), false);
  if (A == 0 || T == 0) return;
  const int t = T - 1;
  for (int k = 0; k < K; ++k) {
    bool strict = true, within = true;
    for (int a = 0; a + 1 < A; ++a) {
      const double d0 = rep.arms[static_cast<size_t>(a)].d[static_cast<size_t>(t)][static_cast<size_t>(k)];
      const double d1 = rep.arms[static_cast<size_t>(a + 1)].d[static_cast<size_t>(t)][static_cast<size_t>(k)];
      const double s0 = rep.arms[static_cast<size_t>(a)].d_se[static_cast<size_t>(t)][static_cast<size_t>(k)];
      const double s1 = rep.arms[static_cast<size_t>(a + 1)].d_se[static_cast<size_t>(t)][static_cast<size_t>(k)];
      if (!(d1 < d0)) strict = false;
      if (!(d1 <= d0 + 2.0 * std::sqrt(s0 * s0 + s1 * s1))) within = false;
    }
    const double dl = rep.arms[static_cast<size_t>(A - 1)].d[static_cast<size_t>(t)][static_cast<size_t>(k)];
    rep.monotone_strict[static_cast<size_t>(k)] = strict;
    rep.monotone_within_se[static_cast<size_t>(k)] = within;
    rep.final_below_2floor[static_cast<size_t>(k)] =
        dl <= 2.0 * rep.floor[static_cast<size_t>(t)][static_cast<size_t>(k)];
  }
  auto all_of = [](const std::vector<bool>& v) {
    for (bool b : v)
      if (!b) return false;
    return !v.empty();
  };
  rep.all_monotone_strict = all_of(rep.monotone_strict);
  rep.all_monotone_within_se = all_of(rep.monotone_within_se);
  rep.all_final_below_2floor = all_of(rep.final_below_2floor);
}

std::string convergence_report_json(const ConvergenceReport& rep) {
  nlohmann::ordered_json j;
  j["nu_list"] = rep.nu_list;
  j["tau_grid"] = rep.tau_grid;
  j["n_modes"] = rep.n_modes;
  j["n_paths"] = rep.n_paths;
  j["arms"] = nlohmann::ordered_json::array();
  for (const ConvergenceArm& a : rep.arms) {
    nlohmann::ordered_json ja;
    ja["nu"] = a.nu;
    ja["d"] = a.d;
    ja["d_se"] = a.d_se;
    j["arms"].push_back(std::move(ja));
  }
  j["floor"] = rep.floor;
  j["monotone_strict"] = rep.monotone_strict;
  j["monotone_within_se"] = rep.monotone_within_se;
  j["final_below_2floor"] = rep.final_below_2floor;
  j["all_monotone_strict"] = rep.all_monotone_strict;
  j["all_monotone_within_se"] = rep.all_monotone_within_se;
  j["all_final_below_2floor"] = rep.all_final_below_2floor;
  return j.dump(2);
}

std::string convergence_report_table(const ConvergenceReport& rep) {
  std::ostringstream os;
  os.precision(12);
  os << "# nu";
  for (int k = 1; k <= rep.n_modes; ++k)
    os << " d" << k << " se" << k << " floor" << k;
  os << "  (final record time)\n";
  const int t = static_cast<int>(rep.tau_grid.size()) - 1;
  for (const ConvergenceArm& a : rep.arms) {
    os << a.nu;
    for (int k = 0; k < rep.n_modes; ++k)
      os << ' ' << a.d[static_cast<size_t>(t)][static_cast<size_t>(k)] << ' '
         << a.d_se[static_cast<size_t>(t)][static_cast<size_t>(k)] << ' '
         << rep.floor[static_cast<size_t>(t)][static_cast<size_t>(k)];
    os << '\n';
  }
  return os.str();
}

std::string convergence_plot_script(const ConvergenceReport& rep, const std::string& dat_name) {
  std::ostringstream os;
  os << "set logscale xy\n"
     << "set xlabel 'nu'\n"
     << "set ylabel 'W1(action law, effective law)'\n"
     << "set key left top\n"
     << "plot ";
  for (int k = 0; k < rep.n_modes; ++k) {
    const int cd = 2 + 3 * k, cf = 4 + 3 * k;
    if (k) os << ", \\\n     ";
    os << '\'' << dat_name << "' using 1:" << cd << " with linespoints title 'mode " << (k + 1)
       << "', '" << dat_name << "' using 1:" << cf << " with lines dashtype 2 title 'floor "
       << (k + 1) << '\'';
  }
  os << '\n';
  return os.str();
}

namespace {

// Distances of every arm law against the reference laws, plus floors and
// verdicts; shared by the field-space and pair-space studies.
template <typename ArmEnsemble>
ConvergenceReport assemble_report(const std::vector<double>& nu_list,
                                  const std::vector<double>& tau_grid, int n_modes, int n_paths,
                                  const std::vector<EmpiricalLaw>& eff_laws,
                                  const std::vector<ArmEnsemble>& arm_ensembles, int n_floor_splits,
                                  int n_boot, std::uint64_t seed) {
  ConvergenceReport rep;
  rep.nu_list = nu_list;
  rep.tau_grid = tau_grid;
  rep.n_modes = n_modes;
  rep.n_paths = n_paths;
  const int T = static_cast<int>(tau_grid.size());

  rep.floor.assign(static_cast<size_t>(T), std::vector<double>(static_cast<size_t>(n_modes), 0.0));
  for (int t = 0; t < T; ++t)
    for (int k = 1; k <= n_modes; ++k)
      rep.floor[static_cast<size_t>(t)][static_cast<size_t>(k - 1)] =
          same_law_floor(eff_laws[static_cast<size_t>(t)].marginal(k), n_floor_splits, seed,
                         static_cast<std::uint64_t>(t * 64 + k));

  for (size_t ai = 0; ai < arm_ensembles.size(); ++ai) {
    ConvergenceArm arm;
    arm.nu = nu_list[ai];
    arm.d.assign(static_cast<size_t>(T), std::vector<double>(static_cast<size_t>(n_modes), 0.0));
    arm.d_se = arm.d;
    for (int t = 0; t < T; ++t) {
      const EmpiricalLaw law = EmpiricalLaw::at_time(arm_ensembles[ai], t);
      for (int k = 1; k <= n_modes; ++k) {
        const std::vector<double> xa = law.marginal(k);
        const std::vector<double> xb = eff_laws[static_cast<size_t>(t)].marginal(k);
        arm.d[static_cast<size_t>(t)][static_cast<size_t>(k - 1)] = wasserstein1(xa, xb);
        arm.d_se[static_cast<size_t>(t)][static_cast<size_t>(k - 1)] = w1_bootstrap_se(
            xa, xb, n_boot, seed, static_cast<std::uint64_t>(((ai + 1) * T + t) * 64 + k));
      }
    }
    rep.arms.push_back(std::move(arm));
  }
  finalize_report_verdicts(rep);
  return rep;
}

void check_nu_list(const std::vector<double>& nu_list) {
  if (nu_list.empty()) throw ConfigError("convergence study: empty nu list");
  for (size_t i = 0; i < nu_list.size(); ++i) {
    if (!(nu_list[i] > 0)) throw ConfigError("convergence study: nu must be > 0");
    if (i && !(nu_list[i] < nu_list[i - 1]))
      throw ConfigError("convergence study: nu list must be strictly decreasing");
  }
}

}  // namespace

ConvergenceReport convergence_study(const ConvergenceSetup& setup,
                                    const std::vector<double>& nu_list,
                                    const std::vector<double>& tau_grid) {
  check_nu_list(nu_list);
  if (!setup.backend) throw ConfigError("convergence study: null backend");
  const int N = setup.backend->n_pairs();

  // Effective arm: start on the torus of the initial actions.
  const BirkhoffVector v_fwd = setup.backend->forward(setup.u0);
  const ActionVector I0 = actions(v_fwd);
  AngleVector theta = setup.theta0.empty() ? angles(v_fwd) : setup.theta0;
  if (static_cast<int>(theta.size()) != N)
    throw ConfigError("convergence study: theta0 dimension != n_pairs");
  const BirkhoffVector v0_eff = reconstruct(I0, theta);

  EffectiveSystem sys = assemble_effective(setup.backend, setup.noise, setup.quad);
  const auto eff = effective_ensemble(sys, v0_eff, tau_grid, setup.dt_slow, setup.seed,
                                      setup.n_eff_paths, setup.n_threads);
  const int T = static_cast<int>(tau_grid.size());
  std::vector<EmpiricalLaw> eff_laws;
  eff_laws.reserve(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) eff_laws.push_back(EmpiricalLaw::at_time(eff, t));

  std::vector<std::vector<TrajectoryRecord>> arms;
  arms.reserve(nu_list.size());
  for (double nu : nu_list) {
    SpdeConfig cfg;
    cfg.nu = nu;
    cfg.dt = setup.dt_fast;
    cfg.S = setup.S;
    cfg.nonlinearity = setup.nonlinearity;
    cfg.blowup_bound = setup.blowup_bound;
    cfg.tau_grid = tau_grid;
    cfg.seed = setup.seed;  // common random numbers across the nu arms
    arms.push_back(kdv_ensemble(setup.u0, cfg, setup.noise, *setup.backend, setup.n_paths,
                                setup.n_threads));
    for (const TrajectoryRecord& r : arms.back())
      if (r.diverged)
        throw IntegrationError("convergence study: path " + std::to_string(r.path) +
                               " diverged at nu = " + std::to_string(nu));
  }
  return assemble_report(nu_list, tau_grid, N, setup.n_paths, eff_laws, arms,
                         setup.n_floor_splits, setup.n_boot, setup.seed);
}

ConvergenceReport fast_v_study(const EffectiveSystem& sys, const BirkhoffVector& v0,
                               const std::vector<double>& nu_list,
                               const std::vector<double>& tau_grid, double dt_slow, int n_paths,
                               int n_eff_paths, int n_floor_splits, int n_boot, std::uint64_t seed,
                               bool rotation_on, int n_threads) {
  check_nu_list(nu_list);
  const auto eff =
      effective_ensemble(sys, v0, tau_grid, dt_slow, seed, n_eff_paths, n_threads);
  const int T = static_cast<int>(tau_grid.size());
  std::vector<EmpiricalLaw> eff_laws;
  eff_laws.reserve(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) eff_laws.push_back(EmpiricalLaw::at_time(eff, t));

  std::vector<std::vector<EffectiveTrajectory>> arms;
  arms.reserve(nu_list.size());
  for (size_t ai = 0; ai < nu_list.size(); ++ai)
    // independent seeds per arm: with the rotation off the dynamics would
    // otherwise be literally identical across nu
    arms.push_back(fast_v_ensemble(sys, v0, nu_list[ai], tau_grid, dt_slow,
                                   seed + 1000003 * (ai + 1), n_paths, rotation_on, n_threads));
  return assemble_report(nu_list, tau_grid, sys.n_pairs(), n_paths, eff_laws, arms,
                         n_floor_splits, n_boot, seed);
}

// ---------------------------------------------------------------------------

double circular_ks(std::vector<double> angles, std::vector<double> weights) {
  if (angles.empty() || angles.size() != weights.size())
    throw DomainError("circular_ks: empty or mismatched samples");
  double sw = 0, cx = 0, cy = 0;
  for (size_t i = 0; i < angles.size(); ++i) {
    if (weights[i] < 0) throw DomainError("circular_ks: negative weight");
    sw += weights[i];
    cx += weights[i] * std::cos(angles[i]);
    cy += weights[i] * std::sin(angles[i]);
  }
  if (!(sw > 0)) throw DomainError("circular_ks: degenerate pooling, zero total weight");

  // cut the circle opposite the weighted circular mean
  double shift = 0;
  if (std::hypot(cx, cy) > 1e-12 * sw) {
    constexpr double pi = 3.14159265358979323846;
    shift = pi - std::atan2(cy, cx);
  }
  std::vector<size_t> ord(angles.size());
  std::iota(ord.begin(), ord.end(), size_t{0});
  for (double& a : angles) a = wrap_angle(a + shift);
  std::sort(ord.begin(), ord.end(), [&](size_t i, size_t j) { return angles[i] < angles[j]; });

  double F = 0, D = 0;
  for (size_t r = 0; r < ord.size(); ++r) {
    const double x = angles[ord[r]] / kTwoPi;  // uniform CDF value
    D = std::max(D, std::abs(F - x));
    F += weights[ord[r]] / sw;
    D = std::max(D, std::abs(F - x));
  }
  return D;
}

std::vector<double> tent_weights(const std::vector<double>& tau_grid, double lo, double hi) {
  if (!(hi > lo)) throw ConfigError("tent_weights: window must have hi > lo");
  const std::vector<double> tw = trapezoid_weights(tau_grid);
  std::vector<double> f(tau_grid.size(), 0.0);
  double z = 0;
  for (size_t i = 0; i < tau_grid.size(); ++i) {
    const double x = (tau_grid[i] - lo) / (hi - lo);
    f[i] = std::max(0.0, 1.0 - std::abs(2.0 * x - 1.0));
    z += f[i] * tw[i];
  }
  if (!(z > 0)) throw ConfigError("tent_weights: window does not cover the record grid");
  for (double& v : f) v /= z;
  return f;
}

AngleKsResult angle_equidistribution(const std::vector<TrajectoryRecord>& ens,
                                     const std::vector<double>& f) {
  if (ens.empty()) throw DomainError("angle_equidistribution: empty ensemble");
  const size_t T = ens.front().snaps.size();
  if (f.size() != T) throw ConfigError("angle_equidistribution: weight grid size mismatch");
  std::vector<double> grid(T);
  for (size_t i = 0; i < T; ++i) grid[i] = ens.front().snaps[i].tau;
  const std::vector<double> tw = trapezoid_weights(grid);
  double z = 0;
  for (size_t i = 0; i < T; ++i) z += f[i] * tw[i];
  if (std::abs(z - 1.0) > 1e-8)
    throw ConfigError("angle_equidistribution: weights must satisfy sum f * dtau = 1");

  const size_t K = ens.front().snaps.front().phi.size();
  if (K == 0) throw DomainError("angle_equidistribution: trajectories carry no angles");

  AngleKsResult res;
  res.ks.resize(K);
  res.resultant.resize(K);
  std::vector<double> ang, w;
  for (size_t k = 0; k < K; ++k) {
    ang.clear();
    w.clear();
    for (const TrajectoryRecord& r : ens) {
      if (r.diverged || r.snaps.size() != T)
        throw IntegrationError("angle_equidistribution: path " + std::to_string(r.path) +
                               " diverged inside the window");
      for (size_t i = 0; i < T; ++i) {
        const double wi = f[i] * tw[i];
        if (wi <= 0) continue;
        ang.push_back(r.snaps[i].phi[k]);
        w.push_back(wi);
      }
    }
    if (ang.empty()) throw DomainError("angle_equidistribution: degenerate pooling");
    double cx = 0, cy = 0, sw = 0;
    for (size_t i = 0; i < ang.size(); ++i) {
      cx += w[i] * std::cos(ang[i]);
      cy += w[i] * std::sin(ang[i]);
      sw += w[i];
    }
    res.resultant[k] = std::hypot(cx, cy) / sw;
    res.pooled_weight = sw;
    res.ks[k] = circular_ks(ang, w);
  }
  return res;
}

std::vector<double> angle_histogram(const std::vector<TrajectoryRecord>& ens,
                                    const std::vector<double>& f, int mode, int n_bins) {
  if (n_bins < 1) throw ConfigError("angle_histogram: n_bins must be >= 1");
  if (ens.empty()) throw DomainError("angle_histogram: empty ensemble");
  const size_t T = ens.front().snaps.size();
  if (f.size() != T) throw ConfigError("angle_histogram: weight grid size mismatch");
  std::vector<double> grid(T);
  for (size_t i = 0; i < T; ++i) grid[i] = ens.front().snaps[i].tau;
  const std::vector<double> tw = trapezoid_weights(grid);

  std::vector<double> bins(static_cast<size_t>(n_bins), 0.0);
  double sw = 0;
  for (const TrajectoryRecord& r : ens)
    for (size_t i = 0; i < std::min(T, r.snaps.size()); ++i) {
      const double wi = f[i] * tw[i];
      if (wi <= 0) continue;
      const double a = wrap_angle(r.snaps[i].phi.at(static_cast<size_t>(mode - 1)));
      size_t b = static_cast<size_t>(a / kTwoPi * n_bins);
      if (b >= bins.size()) b = bins.size() - 1;
      bins[b] += wi;
      sw += wi;
    }
  if (!(sw > 0)) throw DomainError("angle_histogram: degenerate pooling");
  const double bin_width = kTwoPi / n_bins;
  for (double& b : bins) b /= sw * bin_width;
  return bins;
}

// ---------------------------------------------------------------------------

namespace {

// E over paths of the trapezoid integral of the indicator I_k <= delta.
double occupation_mean(std::vector<std::vector<double>> per_path_series,
                       const std::vector<std::vector<double>>& taus, double delta) {
  if (!(delta > 0)) throw ConfigError("occupation_below: delta must be > 0");
  if (per_path_series.empty()) throw DomainError("occupation_below: empty ensemble");
  const size_t P = per_path_series.size();
  std::vector<double> per_path(P);
  for (size_t p = 0; p < P; ++p) {
    const auto& I = per_path_series[p];
    if (I.size() < 2) throw DomainError("occupation_below: need at least 2 record times");
    double acc = 0;
    for (size_t i = 0; i + 1 < I.size(); ++i) {
      const double g0 = I[i] <= delta ? 1.0 : 0.0;
      const double g1 = I[i + 1] <= delta ? 1.0 : 0.0;
      acc += 0.5 * (g0 + g1) * (taus[p][i + 1] - taus[p][i]);
    }
    per_path[p] = acc / static_cast<double>(P);
  }
  return pairwise_sum(std::move(per_path));
}

}  // namespace

double occupation_below(const std::vector<EffectiveTrajectory>& ens, double delta, int k) {
  std::vector<std::vector<double>> series(ens.size()), taus(ens.size());
  for (size_t p = 0; p < ens.size(); ++p) {
    taus[p] = ens[p].tau;
    series[p].reserve(ens[p].v.size());
    for (const BirkhoffVector& w : ens[p].v)
      series[p].push_back(actions(w).at(static_cast<size_t>(k - 1)));
  }
  return occupation_mean(std::move(series), taus, delta);
}

double occupation_below(const std::vector<TrajectoryRecord>& ens, double delta, int k) {
  std::vector<std::vector<double>> series(ens.size()), taus(ens.size());
  for (size_t p = 0; p < ens.size(); ++p) {
    series[p].reserve(ens[p].snaps.size());
    taus[p].reserve(ens[p].snaps.size());
    for (const Snapshot& s : ens[p].snaps) {
      series[p].push_back(s.I.at(static_cast<size_t>(k - 1)));
      taus[p].push_back(s.tau);
    }
  }
  return occupation_mean(std::move(series), taus, delta);
}

std::vector<double> exp_moment_curve(const std::vector<TrajectoryRecord>& ens, double sigma) {
  if (ens.empty()) throw DomainError("exp_moment_curve: empty ensemble");
  const size_t T = ens.front().snaps.size();
  std::vector<double> curve(T, 0.0);
  std::vector<double> terms(ens.size());
  for (size_t i = 0; i < T; ++i) {
    for (size_t p = 0; p < ens.size(); ++p) {
      const TrajectoryRecord& r = ens[p];
      if (r.diverged || r.snaps.size() != T)
        throw IntegrationError("exp_moment_curve: path " + std::to_string(r.path) + " diverged");
      const double n0 = r.snaps[i].norms[0];
      terms[p] = std::exp(sigma * n0 * n0) / static_cast<double>(ens.size());
    }
    curve[i] = pairwise_sum(terms);
  }
  return curve;
}

double median_of(std::vector<double> xs) {
  if (xs.empty()) throw DomainError("median_of: empty input");
  std::sort(xs.begin(), xs.end());
  const size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_loglog_slope: bad input");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw DomainError("fit_loglog_slope: need positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (!(den > 0)) throw DomainError("fit_loglog_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / den;
}

}  // namespace kdvlab
