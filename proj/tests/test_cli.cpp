#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "cartan/cli.hpp"
#include "cartan/io.hpp"

using namespace cartan;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cartan");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cartan-cli-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<double> row(const std::string& line) {
  std::vector<double> out;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(std::stod(cell));
  return out;
}

}  // namespace

TEST_CASE("integrate the constant-torsion example") {
  const auto dir = scratch("ct");
  const auto r = cli({"integrate", "--preset", "constant-torsion-2d", "--gamma", "1,0", "--kind", "autoparallel",
                      "--v0", "0,1", "--span", "10", "--step", "1e-3", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto csv = lines(slurp(dir / "run.csv"));
  const auto manifest = load(dir / "run.json");
  CHECK(csv[0] == "# cartan " + std::string(kVersion) + " config=" + manifest["config_hash"].get<std::string>());
  CHECK(csv[1] == "s,q1,q2,v1,v2,speed,I1,I2");
  CHECK(csv.size() == 2 + 10001);
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["invariants"]["I1"]["max_drift"].get<double>() < 1e-8);
  CHECK(manifest["invariants"]["I2"]["max_drift"].get<double>() < 1e-8);
  CHECK(manifest["config"]["params"]["gamma1"] == 1.0);
  CHECK(row(csv.back())[0] == 10.0);
}

TEST_CASE("sphere geodesic along the equator is a great circle") {
  const auto dir = scratch("sphere");
  const auto r = cli({"integrate", "--preset", "sphere", "--R", "2", "--kind", "geodesic", "--v0", "0,0.5", "--span",
                      "3", "--step", "1e-3", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto csv = lines(slurp(dir / "run.csv"));
  const auto last = row(csv.back());
  CHECK(std::abs(last[1] - std::acos(-1.0) / 2.0) < 1e-12);
  CHECK(std::abs(last[2] - 1.5) < 1e-10);
  CHECK(std::abs(last[5] - 1.0) < 1e-12);  // speed R * 0.5
}

TEST_CASE("configuration errors exit with code 3") {
  const auto dir = scratch("errors");
  auto r = cli({"integrate", "--preset", "no-such-preset", "--out", dir.string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("no-such-preset") != std::string::npos);

  std::ofstream(dir / "bad.json") << R"({"preset": "sphere", "stepsize": 0.1})";
  r = cli({"integrate", "--config", (dir / "bad.json").string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("stepsize") != std::string::npos);

  r = cli({"integrate", "--preset", "sphere", "--param", "radius=2", "--out", dir.string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("radius") != std::string::npos);

  CHECK(cli({"integrate", "--preset", "flat", "--v0", "1,x"}).code == 3);
  CHECK(cli({"integrate", "--preset", "flat", "--step", "-1"}).code == 3);
  CHECK(cli({"check", "--suite", "", "--preset", "flat", "--out", dir.string()}).code == 3);
  CHECK(cli({"check", "--suite", "bogus", "--preset", "flat", "--out", dir.string()}).code == 3);
  CHECK(cli({"frobnicate"}).code == 3);
  CHECK(cli({"integrate"}).code == 3);
}

TEST_CASE("config file values are overridden by flags") {
  const auto dir = scratch("override");
  std::ofstream(dir / "cfg.json") << R"({"preset": "flat", "params": {"d": 3}, "span": 2.0, "step": 0.01,
                                         "v0": [1, 0, 0], "name": "fromfile"})";
  const auto r = cli({"integrate", "--config", (dir / "cfg.json").string(), "--span", "0.5", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto m = load(dir / "fromfile.json");
  CHECK(m["config"]["span"] == 0.5);
  CHECK(m["config"]["step"] == 0.01);
  CHECK(m["samples"] == 51);
  CHECK(lines(slurp(dir / "fromfile.csv"))[1] == "s,q1,q2,q3,v1,v2,v3,speed");
}

TEST_CASE("output directory defaults to the environment variable") {
  const auto dir = scratch("env");
  setenv("CARTAN_OUTPUT_DIR", dir.string().c_str(), 1);
  const auto r = cli({"integrate", "--preset", "flat", "--span", "0.1", "--name", "envrun"});
  unsetenv("CARTAN_OUTPUT_DIR");
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "envrun.csv"));
}

TEST_CASE("identical configs give byte-identical CSV") {
  const auto a = scratch("det-a");
  const auto b = scratch("det-b");
  const std::vector<std::string> base{"integrate", "--preset", "poly-metric-2d", "--a", "0.7", "--q0", "0.3,0.1",
                                      "--v0", "0.5,0.9", "--method", "rk45", "--span", "4"};
  auto args = base;
  args.insert(args.end(), {"--out", a.string()});
  REQUIRE(cli(args).code == 0);
  args = base;
  args.insert(args.end(), {"--out", b.string()});
  REQUIRE(cli(args).code == 0);
  CHECK(slurp(a / "run.csv") == slurp(b / "run.csv"));
  CHECK(slurp(a / "run.csv").size() > 1000);
}

TEST_CASE("parallel sweep matches individual runs") {
  const auto dir = scratch("sweep");
  const auto r = cli({"integrate", "--preset", "constant-torsion-2d", "--v0", "0.6,0.8", "--span", "2",
                      "--sweep-param", "gamma2", "--sweep-values", "0,0.25,0.5,1", "--jobs", "3", "--out",
                      dir.string(), "--name", "sw"});
  REQUIRE(r.code == 0);
  const auto m = load(dir / "sw-sweep.json");
  REQUIRE(m["runs"].size() == 4);
  CHECK(m["runs"][2]["gamma2"] == 0.5);
  REQUIRE(cli({"integrate", "--preset", "constant-torsion-2d", "--v0", "0.6,0.8", "--span", "2", "--param",
               "gamma2=0.5", "--out", dir.string(), "--name", "single"})
              .code == 0);
  CHECK(slurp(dir / "sw-2.csv") == slurp(dir / "single.csv"));
  CHECK(cli({"integrate", "--preset", "flat", "--sweep-param", "R", "--sweep-values", "1,2", "--out", dir.string()})
            .code == 3);
}

TEST_CASE("check suites") {
  const auto dir = scratch("check");
  auto r = cli({"check", "--suite", "geometry", "--preset", "weitzenboeck-2d", "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);

  r = cli({"check", "--suite", "noether", "--preset", "constant-torsion-2d", "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS noether/momentum-drift") != std::string::npos);
  const auto m = load(dir / "run-check.json");
  CHECK(m["passed"] == true);

  r = cli({"check", "--suite", "embedding", "--embedding", "sphere-holonomic", "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("curvature-from-f") != std::string::npos);
}

TEST_CASE("extremum command") {
  const auto dir = scratch("extremum");
  auto r = cli({"extremum", "--preset", "sphere", "--q0", "1.0,0.0", "--v0", "0.3,0.8", "--segments", "60", "--out",
                dir.string(), "--name", "geo"});
  CHECK(r.code == 0);
  auto m = load(dir / "geo-extremum.json");
  CHECK(m["report"]["converged"] == true);
  CHECK(m["report"]["lambda_norm"].get<double>() < 1e-8);

  r = cli({"extremum", "--preset", "constant-torsion-2d", "--v0", "0.8,0.6", "--segments", "200", "--out",
           dir.string(), "--name", "ct"});
  CHECK(r.code == 0);
  m = load(dir / "ct-extremum.json");
  CHECK(m["report"]["autoparallel_residual"].get<double>() < 1e-4);
  CHECK(m["report"]["y_norm"].get<double>() < 1e-5);
  CHECK(m["reference_deviation"].get<double>() < 1e-4);
  CHECK(lines(slurp(dir / "ct-path.csv"))[1] == "s,q1,q2,y1,y2,lambda1,lambda2");

  r = cli({"extremum", "--preset", "constant-torsion-2d", "--v0", "0.8,0.6", "--segments", "50", "--max-iterations",
           "1", "--out", dir.string(), "--name", "cap"});
  CHECK(r.code == 4);
  CHECK(fs::exists(dir / "cap-path.csv"));
  CHECK(load(dir / "cap-extremum.json")["report"]["converged"] == false);
}

TEST_CASE("report command") {
  const auto dir = scratch("report");
  const auto r = cli({"report", "--embedding", "weitzenboeck-2d", "--param", "gamma1=0.4", "--v0", "0.3,0.9",
                      "--span", "3", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto m = load(dir / "run-conservation.json");
  bool saw_frame = false;
  for (const auto& c : m["charges"]) {
    CHECK(c["rate_residual"].get<double>() < 1e-6);
    if (c["name"] == "frame-I1") {
      saw_frame = true;
      CHECK(c["max_drift"].get<double>() < 1e-8);
      CHECK(c["law"] == "modified");
    }
  }
  CHECK(saw_frame);
  CHECK(lines(slurp(dir / "run-charges.csv"))[1].rfind("s,translation-q1", 0) == 0);
}

TEST_CASE("fnv-1a 64 reference vectors") {
  CHECK(hash_hex("") == "cbf29ce484222325");
  CHECK(hash_hex("a") == "af63dc4c8601ec8c");
  CHECK(hash_hex("foobar") == "85944171f73967e8");
}
