#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "kdvlab/config.hpp"
#include "kdvlab/hill.hpp"

using namespace kdvlab;
namespace {

ExperimentConfig parse_cfg(const std::string& text) {
  return ExperimentConfig::from_toml(toml::Table::parse(text));
}

bool rejects(const std::string& text) {
  try {
    parse_cfg(text).validate();
  } catch (const ConfigError&) {
    return true;
  }
  return false;
}

}  // namespace

TEST_CASE("toml subset parses scalars, arrays, comments and escapes") {
  const auto t = toml::Table::parse(
      "# top comment\n"
      "title = \"kdv # not a comment\"  # trailing\n"
      "count = 42\n"
      "ratio = 2.5\n"
      "tiny = 1e-3\n"
      "flag = false\n"
      "esc = \"a\\tb\\nc\\\"d\\\\e\"\n"
      "\n"
      "[run]\n"
      "grid = [0.0, 0.5, 1]   # mixed int/real widens\n"
      "empty = []\n");
  CHECK(t.get_str("title") == "kdv # not a comment");
  CHECK(t.get_int("count") == 42);
  CHECK(t.get_real("ratio") == 2.5);
  CHECK(t.get_real("tiny") == 1e-3);
  CHECK(t.get_real("count") == 42.0);  // integer widening
  CHECK(t.get_bool("flag") == false);
  CHECK(t.get_str("esc") == "a\tb\nc\"d\\e");
  CHECK(t.get_real_array("run.grid") == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(t.get_real_array("run.empty").empty());
  CHECK(t.has("run.grid"));
  CHECK(!t.has("grid"));
  // defaults only fill in missing keys
  CHECK(t.get_int("missing", 7) == 7);
  CHECK(t.get_str("missing", "x") == "x");
  CHECK_THROWS_AS(t.get_int("missing"), ConfigError);
  // type mismatches are named errors, not coercions
  CHECK_THROWS_AS(t.get_int("ratio"), ConfigError);
  CHECK_THROWS_AS(t.get_str("count"), ConfigError);
  CHECK_THROWS_AS(t.get_bool("count"), ConfigError);
  CHECK_THROWS_AS(t.get_real("title"), ConfigError);
}

TEST_CASE("toml errors carry line numbers") {
  auto line_of = [](const std::string& text) -> std::string {
    try {
      toml::Table::parse(text);
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(line_of("a = 1\nb = ???\n").find("line 2") != std::string::npos);
  CHECK(line_of("a = 1\na = 2\n").find("duplicate key") != std::string::npos);
  CHECK(line_of("[run\n").find("line 1") != std::string::npos);
  CHECK(line_of("just words\n").find("expected key = value") != std::string::npos);
  CHECK(line_of("a = \"\\q\"\n").find("unsupported escape") != std::string::npos);
  CHECK(line_of("a = [1, 2\n").find("array") != std::string::npos);
  CHECK(line_of("bad key = 1\n").find("invalid key") != std::string::npos);
  CHECK(line_of("a = \n").find("missing value") != std::string::npos);
}

TEST_CASE("config defaults round-trip and validate") {
  const ExperimentConfig c = parse_cfg("");
  CHECK(c.mode == "spde");
  CHECK(c.S == 8);
  CHECK(c.N == 2);
  CHECK(c.paths == 8);
  CHECK(c.seed == 0);
  CHECK_NOTHROW(c.validate());

  // canonical serialization is a fixed point of parse -> serialize
  const std::string canon = c.canonical_toml();
  CHECK(canon.rfind("schema = 1", 0) == 0);
  const ExperimentConfig c2 = parse_cfg(canon);
  CHECK(c2.canonical_toml() == canon);
  CHECK(c2.config_hash() == c.config_hash());

  // the hash is sensitive to every resolved field
  ExperimentConfig c3 = c;
  c3.seed = 1;
  CHECK(c3.config_hash() != c.config_hash());
  ExperimentConfig c4 = c;
  c4.noise_gamma += 1e-9;
  CHECK(c4.config_hash() != c.config_hash());
}

TEST_CASE("unknown keys are rejected outright") {
  CHECK_THROWS_AS(parse_cfg("walrus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_cfg("[run]\npathz = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_cfg("[backends]\nname = \"linear\"\n"), ConfigError);
}

TEST_CASE("schema validation catches inconsistent requests") {
  CHECK(rejects("schema = 2\n"));
  CHECK(rejects("[run]\nmode = \"dance\"\n"));
  CHECK(rejects("[backend]\nname = \"spooky\"\n"));
  CHECK(rejects("[backend]\nn = 0\n"));
  CHECK(rejects("[backend]\nname = \"synthetic\"\nn = 1\n"));
  CHECK(rejects("[run]\nS = 4\n[backend]\nn = 6\n"));  // S < N
  CHECK(rejects("[run]\npaths = 0\n"));
  CHECK(rejects("[run]\nthreads = 0\n"));
  CHECK(rejects("[run]\ndt_slow = 0.0\n"));
  CHECK(rejects("[run]\ndt_fast = -0.1\n"));
  CHECK(rejects("[run]\nblowup = 0.0\n"));
  CHECK(rejects("[run]\ntau_grid = [0.0, 0.5, 0.4]\n"));
  CHECK(rejects("[run]\ntau_grid = [-0.5, 0.5]\n"));
  CHECK(rejects("[run]\ntau_end = 0.0\n"));
  CHECK(rejects("[run]\nrecords = 1\n"));
  CHECK(rejects("[noise]\nc = 0.0\n"));
  CHECK(rejects("[noise]\nprofile = \"exp\"\ngamma = 0.0\n"));
  CHECK(rejects("[noise]\nprofile = \"poly\"\nm = 0.5\n"));
  CHECK(rejects("[initial]\nkind = \"comb\"\n"));
  CHECK(rejects("[run]\nS = 2\n[initial]\namplitudes = [0.1, 0.1, 0.1]\n"));
  CHECK(rejects("[initial]\namplitudes = [0.1, 0.1]\nphases = [0.0]\n"));
  CHECK(rejects("[analysis]\ntheta0 = [0.1]\n"));  // backend.n = 2
  CHECK(rejects("[quadrature]\nkind = \"tensor\"\nm = 0\n"));
  CHECK(rejects("[quadrature]\nkind = \"lattice\"\ncount = 0\n"));
  CHECK(rejects("[analysis]\ndeltas = [0.1, 0.0]\n"));
  CHECK(rejects("[analysis]\nfloor_splits = 0\n"));
  CHECK(rejects("[analysis]\nbootstrap = 1\n"));
  CHECK(rejects("[run]\nmode = \"convergence\"\n"));  // no nu_list
  CHECK(rejects("[run]\nmode = \"convergence\"\nnu_list = [0.1, 0.2]\n"));
  CHECK(rejects("[run]\nmode = \"convergence\"\nnu_list = [0.1, 0.0]\n"));
  CHECK(rejects("[run]\nmode = \"equidistribution\"\n[analysis]\nwindow = [0.5, 0.5]\n"));
  // spectrum-only backend cannot drive pair-space modes
  CHECK(rejects("[run]\nmode = \"effective\"\n[backend]\nname = \"hill\"\n"));
  CHECK(rejects("[run]\nmode = \"equidistribution\"\n[backend]\nname = \"hill\"\n"));
  CHECK(!rejects("[backend]\nname = \"hill\"\n"));  // spde mode is fine
  CHECK(rejects("[run]\nseed = -3\n"));
  CHECK(rejects("[analysis]\nwindow = [0.1, 0.5, 0.9]\n"));
}

TEST_CASE("factories build what the config names") {
  const ExperimentConfig c = parse_cfg(
      "[backend]\nname = \"synthetic\"\nn = 3\neps = 0.07\n"
      "[run]\nS = 6\nseed = 5\n"
      "[noise]\nprofile = \"poly\"\nc = 0.4\nm = 2.0\n");
  auto backend = c.make_backend();
  CHECK(std::string(backend->name()) == "synthetic");
  CHECK(backend->n_pairs() == 3);
  CHECK(std::dynamic_pointer_cast<SyntheticBackend>(backend)->eps_map() == 0.07);

  const NoiseSpec ns = c.make_noise();
  CHECK(ns.modes() == 6);
  for (int j = 1; j <= 6; ++j)
    CHECK(ns(j) == doctest::Approx(0.4 * std::pow(double(j), -2.0)).epsilon(1e-15));

  const ExperimentConfig ce = parse_cfg("[noise]\nprofile = \"exp\"\nc = 0.3\ngamma = 0.5\n");
  const NoiseSpec nse = ce.make_noise();
  for (int j = 1; j <= 8; ++j)
    CHECK(nse(j) == doctest::Approx(0.3 * std::exp(-0.5 * j)).epsilon(1e-15));

  auto lin = parse_cfg("[backend]\nname = \"linear\"\nn = 4\n").make_backend();
  CHECK(std::dynamic_pointer_cast<LinearBackend>(lin) != nullptr);
  auto hill = parse_cfg("[backend]\nname = \"hill\"\nn = 3\nmodes_factor = 6\n").make_backend();
  CHECK(std::dynamic_pointer_cast<HillBackend>(hill) != nullptr);
  CHECK(hill->n_pairs() == 3);
}

TEST_CASE("quadrature factory respects kind and sizes") {
  auto q1 = parse_cfg("[quadrature]\nkind = \"tensor\"\nm = 5\n").make_quadrature();
  CHECK(q1.kind == "tensor");
  CHECK(q1.size() == 25);  // m^N with N = 2
  auto q2 = parse_cfg("[quadrature]\nkind = \"lattice\"\ncount = 101\n").make_quadrature();
  CHECK(q2.kind == "lattice");
  CHECK(q2.size() == 101);
  auto q3 = parse_cfg("[quadrature]\nkind = \"mc\"\ncount = 33\n").make_quadrature();
  CHECK(q3.kind == "mc");
  CHECK(q3.size() == 33);
  // auto: tensor for small N, lattice beyond
  auto qa = parse_cfg("[quadrature]\nkind = \"auto\"\n").make_quadrature();
  CHECK(qa.kind == "tensor");
  auto qb =
      parse_cfg("[backend]\nname = \"linear\"\nn = 5\n[run]\nS = 8\n[quadrature]\nkind = \"auto\"\n")
          .make_quadrature();
  CHECK(qb.kind == "lattice");
}

TEST_CASE("record grid and initial data factories") {
  const ExperimentConfig c = parse_cfg("[run]\ntau_end = 2.0\nrecords = 5\n");
  CHECK(c.make_tau_grid() == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
  const ExperimentConfig cg = parse_cfg("[run]\ntau_grid = [0.0, 0.3]\ntau_end = 9.0\n");
  CHECK(cg.make_tau_grid() == std::vector<double>{0.0, 0.3});

  const FourierField z = parse_cfg("[initial]\nkind = \"zero\"\n").make_u0();
  CHECK(sobolev_norm(z, 0) == 0.0);

  const FourierField p =
      parse_cfg("[initial]\nkind = \"pairs\"\namplitudes = [0.3, 0.2]\nphases = [0.0, 1.1]\n")
          .make_u0();
  CHECK(p.plus(1) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(p.minus(1) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(p.plus(2) == doctest::Approx(0.2 * std::cos(1.1)).epsilon(1e-15));
  CHECK(p.minus(2) == doctest::Approx(0.2 * std::sin(1.1)).epsilon(1e-15));

  const FourierField d =
      parse_cfg("[run]\nS = 6\n[initial]\nkind = \"decay\"\namp = 0.5\np = 1.5\n").make_u0();
  for (int j = 1; j <= 6; ++j) {
    const double mag = std::hypot(d.plus(j), d.minus(j));
    CHECK(mag == doctest::Approx(0.5 * std::pow(double(j), -1.5)).epsilon(1e-12));
  }
}
