#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "ceq/errors.hpp"
#include "ceq/numerics.hpp"
#include "cli/app.hpp"
#include "cli/config.hpp"
#include "cli/output.hpp"

using namespace ceqcli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("ceqsim_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int status;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "ceqsim");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

std::string out_dir(const std::string& name) { return (scratch_dir() / name).string(); }

}  // namespace

TEST_CASE("frequency units") {
  CHECK(parse_frequency(json(1.5e9), "f") == doctest::Approx(ceq::kTwoPi * 1.5e9));
  CHECK(parse_frequency(json("2pi*1.5e9"), "f") == doctest::Approx(ceq::kTwoPi * 1.5e9));
  CHECK(parse_frequency(json("2pi*1.5 GHz"), "f") == doctest::Approx(ceq::kTwoPi * 1.5e9));
  CHECK(parse_frequency(json("300 MHz"), "f") == doctest::Approx(ceq::kTwoPi * 3e8));
  CHECK(parse_frequency(json("1e9 rad/s"), "f") == 1e9);
  CHECK_THROWS_AS(parse_frequency(json("fast"), "f"), ceq::ValidationError);
  CHECK_THROWS_AS(parse_frequency(json("1.5 THz"), "f"), ceq::ValidationError);
  CHECK_THROWS_AS(parse_frequency(json::array(), "f"), ceq::ValidationError);
  // the canonical echo re-parses to the same double
  const double w = parse_frequency(json("2pi*1.2345678901 GHz"), "f");
  CHECK(parse_frequency(json(format_frequency(w)), "f") == w);
}

TEST_CASE("strict sections echo defaults") {
  Section s(json::parse(R"({"a": 2, "g": {"start": 1, "stop": 100, "count": 3, "log": true}})"), "p");
  CHECK(s.number("a", 1.0) == 2.0);
  CHECK(s.integer("b", 7) == 7);
  const auto g = s.grid("g", {});
  REQUIRE(g.size() == 3);
  CHECK(g[1] == doctest::Approx(10.0));
  CHECK_NOTHROW(s.finish());
  CHECK(s.resolved()["b"] == 7);

  Section extra(json::parse(R"({"a": 2, "typo": 1})"), "p");
  extra.number("a", 1.0);
  CHECK_THROWS_AS(extra.finish(), ceq::ValidationError);

  Section empty(json::parse(R"({"g": []})"), "p");
  CHECK_THROWS_AS(empty.grid("g", {1.0}), ceq::ValidationError);
  Section wrong(json::parse(R"({"a": "x"})"), "p");
  CHECK_THROWS_AS(wrong.number("a", 1.0), ceq::ValidationError);
}

TEST_CASE("csv rendering is stable") {
  Table t{"x.csv", {"a", "b"}, {{cell(0.1), cell(3)}, {"with,comma", ""}}};
  CHECK(t.render() == "a,b\n0.1,3\n\"with,comma\",\n");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("validation failures exit 2 and write nothing") {
  const auto cfg = write_config("empty.json", R"({"parameters": {"T1_s": []}})");
  const auto r = run({"lifetime-sweep", "--config", cfg.string(), "--out", out_dir("empty")});
  CHECK(r.status == 2);
  CHECK_FALSE(fs::exists(out_dir("empty")));

  const auto typo = write_config("typo.json", R"({"parameters": {"Tphi": [1e-6]}})");
  CHECK(run({"lifetime-sweep", "--config", typo.string(), "--out", out_dir("typo")}).status == 2);
  CHECK(run({"lifetime-sweep", "--config", (scratch_dir() / "missing.json").string()}).status == 2);
  CHECK(run({"teleport", "--config", typo.string()}).status == 2);
  CHECK(run({"lifetime-sweep"}).status == 2);
  const auto mismatch = write_config("mismatch.json", R"({"command": "fgr"})");
  CHECK(run({"lifetime-sweep", "--config", mismatch.string(), "--out", out_dir("mismatch")}).status == 2);
  const auto junk = write_config("junk.json", "{not json");
  CHECK(run({"reduce", "--config", junk.string()}).status == 2);
}

TEST_CASE("lifetime sweep writes csv, summary and a reproducible manifest") {
  const auto cfg = write_config("life.json", R"({"parameters": {"L": [2, 3], "Tphi_s": [4e-6, 1e-5],
      "kappa_over_J": {"start": 0.001, "stop": 0.5, "count": 6, "log": true}}})");
  const auto r = run({"lifetime-sweep", "--config", cfg.string(), "--out", out_dir("life")});
  REQUIRE(r.status == 0);
  const fs::path dir = out_dir("life");
  const std::string csv = slurp(dir / "lifetime.csv");
  CHECK(csv.rfind("L,J_rad_s,kappa_rad_s,T1_s,Tphi_s,kTeff_rad_s,gamma_th,gamma_z_le,gamma_y_le,gamma_z_1f,T_L_s,kappa_opt_flag\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 * 7);
  CHECK(fs::exists(dir / "summary.txt"));
  CHECK_FALSE(fs::exists(dir / "errors.csv"));

  const json manifest = json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["exit_status"] == 0);
  CHECK(manifest["outputs"][0]["sha256"] == sha256_hex(csv));
  // defaults are echoed
  CHECK(manifest["config"]["parameters"]["h_over_omega0"] == 10.0);
  CHECK(manifest["config"]["parameters"]["T1_s"][0] == 315e-6);

  json again = manifest["config"];
  again["output_dir"] = out_dir("life_again");
  const auto cfg2 = write_config("life_again.json", again.dump());
  REQUIRE(run({"lifetime-sweep", "--config", cfg2.string()}).status == 0);
  CHECK(slurp(fs::path(out_dir("life_again")) / "lifetime.csv") == csv);
}

TEST_CASE("worker count and environment do not change outputs") {
  const auto cfg = write_config("rabi.json", R"({"parameters": {"alpha_bar": [0.5, 1.0, 1.84, 2.5]}})");
  REQUIRE(run({"rabi", "--config", cfg.string(), "--out", out_dir("rabi1"), "--workers", "1"}).status == 0);
  ::setenv("CEQSIM_WORKERS", "4", 1);
  REQUIRE(run({"rabi", "--config", cfg.string(), "--out", out_dir("rabi4")}).status == 0);
  const json m = json::parse(slurp(fs::path(out_dir("rabi4")) / "manifest.json"));
  CHECK(m["config"]["workers"] == 4);
  ::setenv("CEQSIM_WORKERS", "many", 1);
  CHECK(run({"rabi", "--config", cfg.string(), "--out", out_dir("rabi_bad")}).status == 2);
  ::unsetenv("CEQSIM_WORKERS");
  CHECK(slurp(fs::path(out_dir("rabi1")) / "rabi.csv") == slurp(fs::path(out_dir("rabi4")) / "rabi.csv"));

  const auto dcfg = write_config("deph.json", R"({"master_seed": 9, "parameters": {"Tphi_s": [4e-6], "omega_tphi": [10, 20], "realizations": 20}})");
  REQUIRE(run({"dephasing", "--config", dcfg.string(), "--out", out_dir("d1"), "--workers", "1"}).status == 0);
  REQUIRE(run({"dephasing", "--config", dcfg.string(), "--out", out_dir("d8"), "--workers", "8"}).status == 0);
  REQUIRE(run({"dephasing", "--config", dcfg.string(), "--out", out_dir("d_seed"), "--seed", "10"}).status == 0);
  const std::string d1 = slurp(fs::path(out_dir("d1")) / "dephasing.csv");
  CHECK(d1 == slurp(fs::path(out_dir("d8")) / "dephasing.csv"));
  CHECK(d1 != slurp(fs::path(out_dir("d_seed")) / "dephasing.csv"));
}

TEST_CASE("failed points are kept in place with an errors sidecar") {
  const auto cfg = write_config("fgr.json", R"({"parameters": {"bath_dim": 256, "bandwidth": 2.5, "n_realizations": 4,
      "coupling_g": [0.06, 0.5]}})");
  const auto r = run({"fgr", "--config", cfg.string(), "--out", out_dir("fgr")});
  CHECK(r.status == 2);
  const fs::path dir = out_dir("fgr");
  const std::string csv = slurp(dir / "fgr.csv");
  CHECK(csv.rfind("driven,channel,coupling_g,kappa,J,bath_dim,raw_rate,rate_stderr,m_squared,matrix_element_sq,fgr_constant\n", 0) == 0);
  CHECK(csv.find("0,y,0.5,0.2,1,256,,,,,\n") != std::string::npos);
  const std::string errors = slurp(dir / "errors.csv");
  CHECK(errors.find("coupling_g=0.5") != std::string::npos);
  CHECK(errors.find("validation") != std::string::npos);
  CHECK(json::parse(slurp(dir / "manifest.json"))["exit_status"] == 2);
}

TEST_CASE("numerical failures exit 3") {
  const auto cfg = write_config("reduce.json", R"({"parameters": {"circuit": {"E_C": "2pi*1 GHz", "E_J": "2pi*15 GHz",
      "E_L": "2pi*0.1875 GHz", "levels_kept": 5}}})");
  const auto r = run({"reduce", "--config", cfg.string(), "--out", out_dir("reduce")});
  CHECK(r.status == 3);
  CHECK(fs::exists(fs::path(out_dir("reduce")) / "errors.csv"));
  CHECK(fs::exists(fs::path(out_dir("reduce")) / "manifest.json"));
}
