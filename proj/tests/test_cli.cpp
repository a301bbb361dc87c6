#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "qgx/errors.hpp"
#include "qgx/runner.hpp"

using namespace qgx;
using namespace qgx::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_config() {
  return json::parse(R"cfg({
    "schema_version": 1,
    "jobs": [
      {"id": "det", "checker": "determinism", "seed": 1,
       "generator": {"name": "entropic", "gamma": 1}, "terminal": "tanh(x)",
       "grid": {"n_steps": 100, "n_points": 201, "half_width": 8},
       "params": {"s": 0.25, "t": 1.0}},
      {"id": "jen", "checker": "jensen", "seed": 2,
       "generator": {"name": "entropic", "gamma": 1},
       "grid": {"n_steps": 48, "n_points": 101, "half_width": 8},
       "params": {"F": "abs", "terminals": ["tanh(x)"]}},
      {"id": "surf", "kind": "solve", "seed": 3,
       "generator": {"name": "zero"}, "terminal": "tanh(x)",
       "grid": {"n_steps": 20, "n_points": 41, "half_width": 6},
       "params": {"time_rows": 5}}
    ]})cfg");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("qgx_test_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("config parse and round trip") {
  const auto cfg = RunConfig::from_json(small_config());
  REQUIRE(cfg.jobs.size() == 3);
  CHECK(cfg.jobs[0].kind == "check");
  CHECK(cfg.jobs[2].kind == "solve");
  CHECK(cfg.output_dir == "qgx-out");
  const auto again = RunConfig::from_json(cfg.to_json());
  CHECK(again.digest() == cfg.digest());
  CHECK(again.to_json() == cfg.to_json());
  CHECK(RunConfig::parse(small_config().dump(2)).digest() == cfg.digest());

  auto changed = small_config();
  changed["jobs"][0]["seed"] = 9;
  CHECK(RunConfig::from_json(changed).digest() != cfg.digest());
}

TEST_CASE("config validation") {
  auto with = [](auto edit) {
    json j = small_config();
    edit(j);
    return j;
  };
  CHECK_THROWS_AS(RunConfig::from_json(with([](json& j) { j["jobs"][0]["checker"] = "nope"; })),
                  InvalidArgument);
  CHECK_THROWS_AS(RunConfig::from_json(with([](json& j) { j["jobs"][0].erase("seed"); })),
                  InvalidArgument);
  CHECK_THROWS_AS(RunConfig::from_json(with([](json& j) { j["jobs"][1]["id"] = "det"; })),
                  InvalidArgument);
  CHECK_THROWS_AS(RunConfig::from_json(with([](json& j) { j["jobs"][0]["id"] = "a/b"; })),
                  InvalidArgument);
  CHECK_THROWS_AS(RunConfig::from_json(with([](json& j) { j["schema_version"] = 2; })),
                  InvalidArgument);
  CHECK_THROWS_AS(
      RunConfig::from_json(with([](json& j) { j["jobs"][0]["generator"] = {{"name", "cubic"}}; })),
      InvalidArgument);
  CHECK_THROWS_AS(RunConfig::from_json(with([](json& j) { j["jobs"][2]["terminal"] = "tanh(x"; })),
                  InvalidArgument);
  CHECK_THROWS_AS(RunConfig::from_json(with([](json& j) { j["jobs"][2].erase("generator"); })),
                  InvalidArgument);
}

TEST_CASE("malformed JSON reports line and column") {
  try {
    RunConfig::parse("{\n  \"jobs\": [\n    {\"id\": \"a\",, }\n  ]\n}\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 16);
  }
}

TEST_CASE("describe") {
  const std::string all = describe("");
  for (const auto& c : known_checkers()) {
    CHECK(all.find(c) != std::string::npos);
    CHECK_FALSE(describe(c).empty());
  }
  CHECK(known_checkers().size() == 13);
  CHECK_THROWS_AS(describe("nope"), InvalidArgument);
}

TEST_CASE("run writes reproducible artifacts") {
  const auto cfg = RunConfig::from_json(small_config());
  const auto d1 = scratch_dir("a");
  const auto d2 = scratch_dir("b");
  RunOptions o1;
  o1.output_dir = d1.string();
  RunOptions o2;
  o2.output_dir = d2.string();
  o2.jobs = 3;
  const auto r1 = run(cfg, o1);
  const auto r2 = run(cfg, o2);
  INFO("failing: ", json(r1.failing).dump());
  CHECK(r1.exit_code() == 0);
  CHECK(r2.exit_code() == 0);
  const std::string s1 = slurp(d1 / "summary.csv");
  CHECK(s1 == slurp(d2 / "summary.csv"));
  CHECK(s1.rfind("# config_digest=" + cfg.digest() + "\n", 0) == 0);
  CHECK(s1.find("job_id,checker,status,pass,margin,tolerance,inputs_digest,error") !=
        std::string::npos);

  const auto rep = json::parse(slurp(d1 / "det.json"));
  CHECK(rep["config_digest"] == cfg.digest());
  CHECK(rep["report"]["status"] == "pass");
  CHECK(rep["job"]["id"] == "det");

  const std::string surf = slurp(d1 / "surf_surface.csv");
  CHECK(surf.rfind("# config_digest=" + cfg.digest(), 0) == 0);
  // about time_rows rows: stride 20 / 5 = 4 gives rows 0, 4, ..., 20
  CHECK(std::count(surf.begin(), surf.end(), '\n') == 2 + 6 * 41);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("a job that throws is reported and fails the run") {
  json j = small_config();
  j["jobs"][1]["params"]["F"] = "cube";
  const auto cfg = RunConfig::from_json(j);
  const auto d = scratch_dir("err");
  RunOptions o;
  o.output_dir = d.string();
  const auto r = run(cfg, o);
  CHECK(r.exit_code() == 1);
  REQUIRE(r.failing.size() == 1);
  CHECK(r.failing[0] == "jen");
  CHECK(slurp(d / "summary.csv").find("cube") != std::string::npos);
  fs::remove_all(d);
}
