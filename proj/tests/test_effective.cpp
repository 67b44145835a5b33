#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"
#include "kdvlab/effective.hpp"
#include "kdvlab/hill.hpp"
#include "kdvlab/rng.hpp"

using namespace kdvlab;
namespace {

BirkhoffVector random_state(int n, double amp, std::uint64_t seed) {
  BirkhoffVector v(n);
  CounterRng rng(seed, stream_id(StreamPurpose::scratch, 0, 21));
  for (int j = 1; j <= n; ++j) {
    v[j].x = amp * rng.gauss();
    v[j].y = amp * rng.gauss();
  }
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double state_gap(const BirkhoffVector& a, const BirkhoffVector& b) {
  double m = 0;
  for (int j = 1; j <= a.n_pairs(); ++j)
    m = std::max({m, std::abs(a[j].x - b[j].x), std::abs(a[j].y - b[j].y)});
  return m;
}

}  // namespace

TEST_CASE("assembly needs an invertible backend with first derivatives") {
  NoiseSpec ns({0.5, 0.25}, 1.0, 1.0);
  CHECK_THROWS_AS(assemble_effective(nullptr, ns, TorusQuadrature::tensor(2, 4)), ConfigError);
  // spectrum-only backend: actions exist, coordinates do not
  auto hill = std::make_shared<HillBackend>(2);
  CHECK_THROWS_AS(assemble_effective(hill, ns, TorusQuadrature::tensor(2, 4)), CapabilityError);
  // quadrature dimension has to match the pair count
  auto lin = std::make_shared<LinearBackend>(2);
  CHECK_THROWS_AS(assemble_effective(lin, ns, TorusQuadrature::tensor(3, 4)), ConfigError);
  CHECK_NOTHROW(assemble_effective(lin, ns, TorusQuadrature::tensor(2, 4)));
}

TEST_CASE("averaged drift splits into its two layers exactly") {
  NoiseSpec ns({0.4, 0.3, 0.2}, 0.5, 0.5);
  auto check_split = [&](std::shared_ptr<BirkhoffBackend> backend) {
    auto sys = assemble_effective(backend, ns, TorusQuadrature::tensor(3, 8));
    for (std::uint64_t s = 0; s < 4; ++s) {
      const BirkhoffVector v = random_state(3, 0.3, 100 + s);
      const auto d = sys.drift(v);
      const auto r1 = sys.r1(v);
      const auto r2 = sys.r2(v);
      double scale = 1e-300;
      for (double x : d) scale = std::max(scale, std::abs(x));
      for (size_t i = 0; i < d.size(); ++i)
        CHECK(std::abs(d[i] - r1[i] - r2[i]) < 1e-12 * std::max(1.0, scale));
    }
  };
  check_split(std::make_shared<LinearBackend>(3));
  check_split(std::make_shared<SyntheticBackend>(3, 0.05));
}

TEST_CASE("numeric second derivatives reproduce the analytic assembly") {
  auto backend = std::make_shared<SyntheticBackend>(2, 0.04);
  NoiseSpec ns({0.4, 0.3}, 0.5, 0.5);
  auto sys_a = assemble_effective(backend, ns, TorusQuadrature::tensor(2, 8), false);
  auto sys_n = assemble_effective(backend, ns, TorusQuadrature::tensor(2, 8), true);
  for (std::uint64_t s = 0; s < 3; ++s) {
    const BirkhoffVector v = random_state(2, 0.25, 300 + s);
    CHECK(max_abs_diff(sys_a.drift(v), sys_n.drift(v)) < 1e-4);
  }
}

TEST_CASE("rotation-invariant fields give the pure heat drift") {
  // backend = identity dressing: averaging changes nothing, <P1> = -k^2 v and
  // the residual is just the state-independent Ito term
  auto backend = std::make_shared<LinearBackend>(3);
  NoiseSpec ns({0.4, 0.3, 0.2}, 0.5, 0.5);
  auto sys = assemble_effective(backend, ns, TorusQuadrature::tensor(3, 8));
  const BirkhoffVector v = random_state(3, 0.4, 17);
  const auto d = sys.r1(v);
  for (int k = 1; k <= 3; ++k) {
    CHECK(d[2 * size_t(k - 1)] == doctest::Approx(-double(k * k) * v[k].x).epsilon(1e-12));
    CHECK(d[2 * size_t(k - 1) + 1] == doctest::Approx(-double(k * k) * v[k].y).epsilon(1e-12));
  }
  // the Ito layer must not depend on where on the torus it is sampled
  const auto r2a = sys.r2(v);
  const auto r2b = sys.r2(random_state(3, 0.4, 18));
  CHECK(max_abs_diff(r2a, r2b) < 1e-12);
}

TEST_CASE("with the noise switched off the flow is the exact heat decay") {
  auto backend = std::make_shared<LinearBackend>(2);
  NoiseSpec ns({1e-30, 1e-30}, 2e-30, 0.0);
  auto sys = assemble_effective(backend, ns, TorusQuadrature::tensor(2, 4));
  const BirkhoffVector v0 = random_state(2, 0.5, 7);
  auto tr = integrate_effective(sys, v0, {0.0, 0.5, 1.0}, 1e-3, 42);
  REQUIRE(tr.tau.size() == 3);
  CHECK(!tr.diverged);
  for (size_t t = 0; t < tr.tau.size(); ++t) {
    for (int k = 1; k <= 2; ++k) {
      const double decay = std::exp(-double(k * k) * tr.tau[t]);
      CHECK(tr.v[t][k].x == doctest::Approx(v0[k].x * decay).epsilon(1e-10));
      CHECK(tr.v[t][k].y == doctest::Approx(v0[k].y * decay).epsilon(1e-10));
    }
  }
}

TEST_CASE("deterministic stepping converges at first order") {
  // non-equivariant dressing makes the residual genuinely state dependent;
  // with negligible noise the scheme is a deterministic splitting method
  auto backend = std::make_shared<SyntheticBackend>(2, 0.05);
  NoiseSpec ns({1e-30, 1e-30}, 2e-30, 0.0);
  auto sys = assemble_effective(backend, ns, TorusQuadrature::tensor(2, 8));
  const BirkhoffVector v0 = random_state(2, 0.35, 9);
  auto run = [&](double dt) { return integrate_effective(sys, v0, {0.0, 0.5}, dt, 1).v[1]; };
  const BirkhoffVector ref = run(0.04 / 16);
  const double e1 = state_gap(run(0.04), ref);
  const double e2 = state_gap(run(0.02), ref);
  CHECK(e1 > 0);
  CHECK(e1 / e2 > 1.6);
  CHECK(e1 / e2 < 2.6);
}

TEST_CASE("stationary action means match the balance law") {
  auto backend = std::make_shared<LinearBackend>(2);
  NoiseSpec ns({0.5, 0.25}, 0.5, 1.0);
  auto sys = assemble_effective(backend, ns, TorusQuadrature::tensor(2, 4));
  const BirkhoffVector v0 = reconstruct({0.0, 0.0}, {0.0, 0.0});
  const double dt = 5e-3;
  auto ens = effective_ensemble(sys, v0, {0.0, 6.0}, dt, 7, 384, 1);
  for (int k = 1; k <= 2; ++k) {
    double mean = 0;
    for (auto& tr : ens) mean += actions(tr.v[1])[size_t(k - 1)];
    mean /= double(ens.size());
    const double b = ns(k);
    // semi-implicit stepping thins the stationary action by 2r/(e^{2r}-1)
    const double r = double(k * k) * dt;
    const double expect = b * b / (2.0 * k * k * k) * (2.0 * r / std::expm1(2.0 * r));
    const double se = expect / std::sqrt(double(ens.size()));  // exponential-law spread
    CHECK(std::abs(mean - expect) < 4.0 * se);
  }
}

TEST_CASE("effective ensembles are reproducible across thread counts") {
  auto backend = std::make_shared<LinearBackend>(2);
  NoiseSpec ns({0.5, 0.25}, 1.0, 1.0);
  auto sys = assemble_effective(backend, ns, TorusQuadrature::tensor(2, 4));
  const BirkhoffVector v0 = random_state(2, 0.3, 5);
  auto a = effective_ensemble(sys, v0, {0.0, 0.2}, 2e-3, 99, 6, 1);
  auto b = effective_ensemble(sys, v0, {0.0, 0.2}, 2e-3, 99, 6, 3);
  REQUIRE(a.size() == b.size());
  for (size_t p = 0; p < a.size(); ++p) {
    CHECK(a[p].path == b[p].path);
    for (size_t t = 0; t < a[p].v.size(); ++t) CHECK(state_gap(a[p].v[t], b[p].v[t]) == 0.0);
  }
  // a lone path re-integrated with its ensemble index is bit-identical
  auto solo = integrate_effective(sys, v0, {0.0, 0.2}, 2e-3, 99, 3);
  CHECK(state_gap(solo.v[1], a[3].v[1]) == 0.0);
  // different path indices see independent noise
  CHECK(state_gap(a[0].v[1], a[1].v[1]) > 0.0);
}

TEST_CASE("coupled trajectories from equal starts never separate") {
  auto backend = std::make_shared<LinearBackend>(2);
  NoiseSpec ns({0.5, 0.25}, 1.0, 1.0);
  auto sys = assemble_effective(backend, ns, TorusQuadrature::tensor(2, 4));
  const BirkhoffVector v0 = random_state(2, 0.3, 31);
  auto curve = contraction_test(sys, v0, v0, 0.5, 2e-3, 12, 8);
  CHECK(curve.identically_zero);
  CHECK(curve.gronwall_slope == 0.0);
  for (double g : curve.mean_sq_gap) CHECK(g <= 1e-20);
}

TEST_CASE("coupled trajectories from split starts report a finite gap slope") {
  auto backend = std::make_shared<LinearBackend>(2);
  NoiseSpec ns({0.5, 0.25}, 1.0, 1.0);
  auto sys = assemble_effective(backend, ns, TorusQuadrature::tensor(2, 4));
  const BirkhoffVector v0a = random_state(2, 0.3, 31);
  BirkhoffVector v0b = v0a;
  v0b[1].x += 0.05;
  auto curve = contraction_test(sys, v0a, v0b, 0.5, 2e-3, 12, 16);
  CHECK(!curve.identically_zero);
  REQUIRE(!curve.mean_sq_gap.empty());
  CHECK(curve.mean_sq_gap.front() == doctest::Approx(0.05 * 0.05).epsilon(1e-12));
  for (double g : curve.mean_sq_gap) CHECK(g > 0);
  CHECK(std::isfinite(curve.gronwall_slope));
  // the slope is diagnostic output; only sanity-check its magnitude
  CHECK(std::abs(curve.gronwall_slope) < 100.0);
}

TEST_CASE("fast pair dynamics honours the frequency capability") {
  NoiseSpec ns({0.3, 0.2}, 0.5, 0.5);
  auto syn = std::make_shared<SyntheticBackend>(2, 0.05);
  auto sys_syn = assemble_effective(syn, ns, TorusQuadrature::tensor(2, 4));
  const BirkhoffVector v0 = random_state(2, 0.2, 3);
  CHECK_THROWS_AS(integrate_fast_v(sys_syn, v0, 0.1, {0.0, 0.1}, 1e-3, 5, 0, true),
                  CapabilityError);
  auto tr_off = integrate_fast_v(sys_syn, v0, 0.1, {0.0, 0.1}, 1e-3, 5, 0, false);
  CHECK(!tr_off.diverged);
  CHECK(tr_off.v.size() == 2);

  auto lin = std::make_shared<LinearBackend>(2);
  auto sys_lin = assemble_effective(lin, ns, TorusQuadrature::tensor(2, 4));
  auto tr_on = integrate_fast_v(sys_lin, v0, 0.1, {0.0, 0.1}, 1e-3, 5, 0, true);
  CHECK(!tr_on.diverged);
  // the rotation is measure preserving: actions agree in distribution, and
  // pathwise they differ from the frozen-phase run
  CHECK(state_gap(tr_on.v[1], tr_off.v[1]) > 0);
  CHECK_THROWS_AS(integrate_fast_v(sys_lin, v0, 0.0, {0.0, 0.1}, 1e-3, 5), ConfigError);
  CHECK_THROWS_AS(integrate_fast_v(sys_lin, v0, -0.1, {0.0, 0.1}, 1e-3, 5), ConfigError);
}

TEST_CASE("fast ensembles reproduce across thread counts") {
  auto lin = std::make_shared<LinearBackend>(2);
  NoiseSpec ns({0.3, 0.2}, 0.5, 0.5);
  auto sys = assemble_effective(lin, ns, TorusQuadrature::tensor(2, 4));
  const BirkhoffVector v0 = random_state(2, 0.2, 3);
  auto a = fast_v_ensemble(sys, v0, 0.1, {0.0, 0.1}, 1e-3, 13, 5, true, 1);
  auto b = fast_v_ensemble(sys, v0, 0.1, {0.0, 0.1}, 1e-3, 13, 5, true, 2);
  REQUIRE(a.size() == b.size());
  for (size_t p = 0; p < a.size(); ++p)
    for (size_t t = 0; t < a[p].v.size(); ++t) CHECK(state_gap(a[p].v[t], b[p].v[t]) == 0.0);
}

TEST_CASE("pair trajectories export with norms taken through the inverse") {
  auto backend = std::make_shared<LinearBackend>(2);
  NoiseSpec ns({0.5, 0.25}, 1.0, 1.0);
  auto sys = assemble_effective(backend, ns, TorusQuadrature::tensor(2, 4));
  const BirkhoffVector v0 = random_state(2, 0.3, 77);
  auto tr = integrate_effective(sys, v0, {0.0, 0.25, 0.5}, 2e-3, 21, 4);
  auto rec = to_trajectory_record(sys, tr);
  REQUIRE(rec.snaps.size() == tr.v.size());
  CHECK(rec.path == 4);
  CHECK(!rec.diverged);
  auto series = tr.actions_series();
  for (size_t t = 0; t < tr.v.size(); ++t) {
    CHECK(rec.snaps[t].tau == tr.tau[t]);
    const ActionVector I = actions(tr.v[t]);
    const AngleVector ph = angles(tr.v[t]);
    REQUIRE(rec.snaps[t].I.size() == 2);
    for (int k = 0; k < 2; ++k) {
      CHECK(rec.snaps[t].I[size_t(k)] == doctest::Approx(I[size_t(k)]).epsilon(1e-14));
      CHECK(rec.snaps[t].phi[size_t(k)] == doctest::Approx(ph[size_t(k)]).epsilon(1e-14));
      CHECK(series[t][size_t(k)] == doctest::Approx(I[size_t(k)]).epsilon(1e-14));
    }
    const FourierField u = backend->inverse(tr.v[t]);
    for (int m = 0; m < 4; ++m)
      CHECK(rec.snaps[t].norms[size_t(m)] == doctest::Approx(sobolev_norm(u, m)).epsilon(1e-13));
  }
}

TEST_CASE("integration rejects malformed arguments") {
  auto backend = std::make_shared<LinearBackend>(2);
  NoiseSpec ns({0.5, 0.25}, 1.0, 1.0);
  auto sys = assemble_effective(backend, ns, TorusQuadrature::tensor(2, 4));
  const BirkhoffVector v0 = random_state(2, 0.3, 1);
  CHECK_THROWS_AS(integrate_effective(sys, v0, {0.0, 0.1}, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(integrate_effective(sys, v0, {}, 1e-3, 1), ConfigError);
  CHECK_THROWS_AS(integrate_effective(sys, v0, {0.2, 0.1}, 1e-3, 1), ConfigError);
  CHECK_THROWS_AS(integrate_effective(sys, random_state(3, 0.3, 1), {0.0, 0.1}, 1e-3, 1),
                  ConfigError);
}
