#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"

namespace fs = std::filesystem;
namespace {

const char* kBin = KDVLAB_RUN_BIN;

fs::path work_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "kdvlab-cli-tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  os << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(kBin) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string run_cli_capture(const std::string& args) {
  const std::string cmd = std::string(kBin) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[256];
  while (fgets(buf, sizeof buf, pipe)) out += buf;
  pclose(pipe);
  return out;
}

size_t count_lines(const std::string& s) {
  size_t n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

const char* kSpdeToml =
    "[run]\n"
    "mode = \"spde\"\n"
    "S = 4\n"
    "nu = 0.1\n"
    "paths = 3\n"
    "tau_grid = [0.0, 0.02, 0.05]\n"
    "seed = 1\n"
    "[backend]\n"
    "name = \"linear\"\n"
    "n = 2\n"
    "[noise]\n"
    "profile = \"poly\"\n"
    "c = 0.4\n"
    "m = 2.0\n";

}  // namespace

TEST_CASE("validate-only checks the config and stops") {
  const fs::path dir = work_dir("validate");
  write_file(dir / "ok.toml", kSpdeToml);
  CHECK(run_cli("run " + (dir / "ok.toml").string() + " --validate-only") == 0);
  const std::string out =
      run_cli_capture("run " + (dir / "ok.toml").string() + " --validate-only");
  CHECK(out.find("config ok") != std::string::npos);
  CHECK(out.find("mode=spde") != std::string::npos);
  CHECK(out.find("hash=") != std::string::npos);
  // nothing may be written in validate mode
  CHECK(!fs::exists(dir / "out"));
}

TEST_CASE("config problems exit with code 2") {
  const fs::path dir = work_dir("badconfig");
  write_file(dir / "unknown.toml", "[run]\nwalrus = 1\n");
  CHECK(run_cli("run " + (dir / "unknown.toml").string()) == 2);
  write_file(dir / "badmode.toml", "[run]\nmode = \"dance\"\n");
  CHECK(run_cli("run " + (dir / "badmode.toml").string() + " --validate-only") == 2);
  write_file(dir / "badtoml.toml", "a = ???\n");
  CHECK(run_cli("run " + (dir / "badtoml.toml").string()) == 2);
  CHECK(run_cli("run " + (dir / "missing.toml").string()) == 2);
  // capability clash: spectrum-only backend driving the effective equation
  write_file(dir / "cap.toml", "[run]\nmode = \"effective\"\n[backend]\nname = \"hill\"\n");
  CHECK(run_cli("run " + (dir / "cap.toml").string() + " --validate-only") == 2);
  // malformed command lines are config errors too
  CHECK(run_cli("") == 2);
  CHECK(run_cli("run") == 2);
  CHECK(run_cli("frobnicate x.toml") == 2);
}

TEST_CASE("spde runs leave a manifest and deterministic trajectories") {
  const fs::path dir = work_dir("spde");
  write_file(dir / "cfg.toml", kSpdeToml);
  const fs::path out1 = dir / "out1";
  const fs::path out2 = dir / "out2";
  REQUIRE(run_cli("run " + (dir / "cfg.toml").string() + " --out " + out1.string()) == 0);

  const std::string manifest_text = read_file(out1 / "manifest.json");
  const auto m = nlohmann::json::parse(manifest_text);
  CHECK(m["mode"] == "spde");
  CHECK(m["seed"] == 1);
  CHECK(m["schema_version"] == 1);
  CHECK(m["config_hash"].get<std::string>().size() == 16);
  const auto arts = m["artifacts"].get<std::vector<std::string>>();
  REQUIRE(arts.size() == 1);
  CHECK(arts[0] == "trajectories.jsonl");
  // the manifest embeds the resolved config for audit
  CHECK(m["config_toml"].get<std::string>().find("mode = \"spde\"") != std::string::npos);

  const std::string traj = read_file(out1 / "trajectories.jsonl");
  CHECK(count_lines(traj) == 3 * 3);  // paths x record times
  std::istringstream is(traj);
  std::string line;
  int spde_tagged = 0;
  while (std::getline(is, line)) {
    const auto j = nlohmann::json::parse(line);  // every line is valid json
    CHECK(j.contains("tau"));
    CHECK(j["I"].size() == 2);
    if (j["system"] == "spde") ++spde_tagged;
  }
  CHECK(spde_tagged == 9);

  // same config, fresh directory: byte-identical artifacts
  REQUIRE(run_cli("run " + (dir / "cfg.toml").string() + " --out " + out2.string()) == 0);
  CHECK(read_file(out2 / "trajectories.jsonl") == traj);

  // a seed override changes the run and its recorded identity
  const fs::path out3 = dir / "out3";
  REQUIRE(run_cli("run " + (dir / "cfg.toml").string() + " --out " + out3.string() +
                  " --seed 99") == 0);
  CHECK(read_file(out3 / "trajectories.jsonl") != traj);
  const auto m3 = nlohmann::json::parse(read_file(out3 / "manifest.json"));
  CHECK(m3["seed"] == 99);
  CHECK(m3["config_hash"] != m["config_hash"]);

  // thread count must not affect the bytes
  const fs::path out4 = dir / "out4";
  REQUIRE(run_cli("run " + (dir / "cfg.toml").string() + " --out " + out4.string() +
                  " --threads 3") == 0);
  CHECK(read_file(out4 / "trajectories.jsonl") == traj);
}

TEST_CASE("a blown-up path exits with code 3 but keeps the audit trail") {
  const fs::path dir = work_dir("blowup");
  write_file(dir / "cfg.toml",
             "[run]\nmode = \"spde\"\nS = 4\nnu = 0.5\npaths = 2\n"
             "tau_grid = [0.0, 0.05]\nblowup = 1e-6\n"
             "[backend]\nname = \"linear\"\nn = 2\n"
             "[noise]\nprofile = \"poly\"\nc = 0.4\nm = 2.0\n");
  const fs::path out = dir / "out";
  CHECK(run_cli("run " + (dir / "cfg.toml").string() + " --out " + out.string()) == 3);
  CHECK(fs::exists(out / "manifest.json"));  // manifest precedes the failure
}

TEST_CASE("effective mode writes pair-space trajectories") {
  const fs::path dir = work_dir("effective");
  write_file(dir / "cfg.toml",
             "[run]\nmode = \"effective\"\nS = 4\npaths = 2\ndt_slow = 1e-3\n"
             "tau_grid = [0.0, 0.05]\nseed = 3\n"
             "[backend]\nname = \"linear\"\nn = 2\n"
             "[noise]\nprofile = \"poly\"\nc = 0.4\nm = 2.0\n"
             "[quadrature]\nkind = \"tensor\"\nm = 4\n");
  const fs::path out = dir / "out";
  REQUIRE(run_cli("run " + (dir / "cfg.toml").string() + " --out " + out.string()) == 0);
  const std::string traj = read_file(out / "trajectories.jsonl");
  CHECK(count_lines(traj) == 2 * 2);
  std::istringstream is(traj);
  std::string line;
  while (std::getline(is, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["system"] == "effective");
    CHECK(j["phi"].size() == 2);
  }
}

TEST_CASE("convergence mode emits a well-formed report") {
  const fs::path dir = work_dir("convergence");
  write_file(dir / "cfg.toml",
             "[run]\nmode = \"convergence\"\nS = 4\nnu_list = [0.2]\npaths = 2\n"
             "eff_paths = 8\ndt_slow = 2e-3\ntau_grid = [0.0, 0.05]\nseed = 2\n"
             "nonlinearity = false\n"
             "[backend]\nname = \"linear\"\nn = 2\n"
             "[noise]\nprofile = \"poly\"\nc = 0.4\nm = 2.0\n"
             "[quadrature]\nkind = \"tensor\"\nm = 4\n"
             "[analysis]\nfloor_splits = 4\nbootstrap = 8\n");
  const fs::path out = dir / "out";
  REQUIRE(run_cli("run " + (dir / "cfg.toml").string() + " --out " + out.string()) == 0);
  const auto rep = nlohmann::json::parse(read_file(out / "report.json"));
  REQUIRE(rep["arms"].size() == 1);
  CHECK(rep["arms"][0]["nu"].get<double>() == 0.2);
  for (const auto& row : rep["arms"][0]["d"])
    for (const auto& v : row) CHECK(v.get<double>() >= 0);
  CHECK(rep["floor"].size() == 2);
  const std::string table = read_file(out / "report.dat");
  CHECK(table.rfind("# nu", 0) == 0);
  const std::string plot = read_file(out / "plot_dnu.gp");
  CHECK(plot.find("report.dat") != std::string::npos);
}

TEST_CASE("equidistribution mode reports per-mode ks statistics") {
  const fs::path dir = work_dir("equi");
  write_file(dir / "cfg.toml",
             "[run]\nmode = \"equidistribution\"\nS = 4\nnu = 0.3\npaths = 4\n"
             "tau_grid = [0.0, 0.1, 0.2, 0.3, 0.4]\nseed = 4\n"
             "[backend]\nname = \"linear\"\nn = 2\n"
             "[noise]\nprofile = \"poly\"\nc = 0.4\nm = 2.0\n"
             "[analysis]\nwindow = [0.1, 0.4]\n");
  const fs::path out = dir / "out";
  REQUIRE(run_cli("run " + (dir / "cfg.toml").string() + " --out " + out.string()) == 0);
  const auto j = nlohmann::json::parse(read_file(out / "equidistribution.json"));
  REQUIRE(j["ks"].size() == 2);
  for (const auto& v : j["ks"]) {
    CHECK(v.get<double>() >= 0);
    CHECK(v.get<double>() <= 0.5);
  }
  CHECK(j["window"][0].get<double>() == 0.1);
  const std::string hist = read_file(out / "angle_hist.dat");
  CHECK(count_lines(hist) == 33);  // header + 32 bins
  CHECK(fs::exists(out / "plot_angles.gp"));
}

TEST_CASE("diagnostics mode reports occupation and moment curves") {
  const fs::path dir = work_dir("diag");
  write_file(dir / "cfg.toml",
             "[run]\nmode = \"diagnostics\"\nS = 4\nnu = 0.2\npaths = 4\neff_paths = 6\n"
             "dt_slow = 2e-3\ntau_grid = [0.0, 0.1, 0.2]\nseed = 5\n"
             "[backend]\nname = \"linear\"\nn = 2\n"
             "[noise]\nprofile = \"poly\"\nc = 0.4\nm = 2.0\n"
             "[quadrature]\nkind = \"tensor\"\nm = 4\n"
             "[analysis]\ndeltas = [0.1, 0.01]\n");
  const fs::path out = dir / "out";
  REQUIRE(run_cli("run " + (dir / "cfg.toml").string() + " --out " + out.string()) == 0);
  const auto j = nlohmann::json::parse(read_file(out / "diagnostics.json"));
  REQUIRE(j["occupation_below"].size() == 2);
  CHECK(j["occupation_below"][0]["delta"].get<double>() == 0.1);
  CHECK(j["occupation_below"][0]["occupation"].size() == 2);
  CHECK(j["moment_curve"].size() == 3);
  CHECK(j["sigma"].get<double>() > 0);
  CHECK(j["moment_final_over_median"].get<double>() > 0);
}
