#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "kdvlab/hill.hpp"

using namespace kdvlab;

TEST_CASE("zero potential: spectrum of the free operator, all gaps closed") {
  HillBackend hill(3, 6);
  FourierField u(4);  // identically zero
  // periodic eigenvalues k^2 (k integer), antiperiodic (k+1/2)^2, merged
  auto spec = hill.combined_spectrum(u, 7);
  std::vector<double> expect = {0.0, 0.25, 0.25, 1.0, 1.0, 2.25, 2.25};
  REQUIRE(spec.size() == expect.size());
  for (size_t i = 0; i < expect.size(); ++i)
    CHECK(spec[i] == doctest::Approx(expect[i]).epsilon(1e-10));
  auto g = hill.gap_lengths(u);
  for (double x : g) CHECK(std::abs(x) < 1e-10);
  auto I = hill.actions_of_field(u);
  for (double x : I) CHECK(std::abs(x) < 1e-18);
}

TEST_CASE("pi-periodic potential keeps every odd gap exactly closed") {
  // cos(2x) has period pi, so only even couplings exist and gap 1 cannot
  // open at any order, while gap 2 opens linearly in the amplitude
  HillBackend hill(2, 8);
  FourierField u(4);
  u.plus(2) = 0.02;
  auto g = hill.gap_lengths(u);
  CHECK(g[1] > 1e-3);
  CHECK(g[0] < 1e-8);
}

TEST_CASE("small-amplitude actions match the quadratic normal form") {
  // I_j -> (u_{+j}^2 + u_{-j}^2) / (2j) as amplitude -> 0
  HillBackend hill(3, 6);
  FourierField u(8);
  u.plus(1) = 0.008;
  u.minus(1) = -0.006;
  u.plus(2) = 0.003;
  u.minus(2) = 0.005;
  u.plus(3) = -0.004;
  u.minus(3) = 0.002;
  auto I = hill.actions_of_field(u);
  for (int j = 1; j <= 3; ++j) {
    double lin = (u.plus(j) * u.plus(j) + u.minus(j) * u.minus(j)) / (2.0 * j);
    CHECK(I[j - 1] == doctest::Approx(lin).epsilon(0.05));
  }
}

TEST_CASE("asymptotic accuracy improves as the amplitude shrinks") {
  HillBackend hill(1, 6);
  auto rel_err = [&](double eps) {
    FourierField u(4);
    u.plus(1) = eps;
    auto I = hill.actions_of_field(u);
    double lin = eps * eps / 2.0;
    return std::abs(I[0] - lin) / lin;
  };
  double e1 = rel_err(0.05), e2 = rel_err(0.01), e3 = rel_err(0.002);
  CHECK(e2 < e1);
  CHECK(e3 < e2);
}

TEST_CASE("actions are invariant under translation of the potential") {
  // x -> x + a maps u_s to a rotated pair; the spectrum cannot move
  HillBackend hill(2, 6);
  FourierField u(4);
  u.plus(1) = 0.06;
  u.minus(2) = 0.04;
  auto I0 = hill.actions_of_field(u);
  const double a = 0.83;
  FourierField v(4);
  for (int j = 1; j <= 4; ++j) {
    // cos(j(x+a)), sin(j(x+a)) expansion in the signed basis
    double c = std::cos(j * a), s = std::sin(j * a);
    v.plus(j) = c * u.plus(j) + s * u.minus(j);
    v.minus(j) = -s * u.plus(j) + c * u.minus(j);
  }
  auto I1 = hill.actions_of_field(v);
  for (int j = 0; j < 2; ++j) CHECK(I1[j] == doctest::Approx(I0[j]).epsilon(1e-8));
}

TEST_CASE("truncation refinement changes resolved gaps only at rounding level") {
  FourierField u(6);
  u.plus(1) = 0.05;
  u.minus(2) = 0.03;
  u.plus(3) = 0.02;
  auto g4 = HillBackend(3, 4).gap_lengths(u);
  auto g8 = HillBackend(3, 8).gap_lengths(u);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(g4[j] - g8[j]) < 1e-8);
}

TEST_CASE("capability surface: actions only") {
  HillBackend hill(2, 4);
  CHECK_FALSE(hill.has_forward());
  CHECK_FALSE(hill.has_inverse());
  CHECK_FALSE(hill.has_jacobian());
  CHECK_FALSE(hill.has_angles());
  FourierField u(4);
  u.plus(1) = 0.1;
  CHECK_THROWS_AS(hill.forward(u), CapabilityError);
  CHECK_THROWS_AS(hill.inverse(BirkhoffVector(2)), CapabilityError);
}

TEST_CASE("unresolvable requests are refused") {
  CHECK_THROWS_AS(HillBackend(0, 4), ConfigError);
  CHECK_THROWS_AS(HillBackend(2, 1), ConfigError);
  FourierField u(2);
  u.plus(1) = 0.05;
  // 8 gaps cannot be resolved from a truncation-2 field at factor 2
  HillBackend big(8, 2);
  CHECK_THROWS(big.actions_of_field(u));
}
