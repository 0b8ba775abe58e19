#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "hamflow/errors.hpp"
#include "hamflow/scenario.hpp"

using namespace hamflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Report JSON with the generated_at line removed.
std::string strip_timestamp(std::string text) {
  const auto start = text.find("\"generated_at\"");
  if (start == std::string::npos) return text;
  const auto end = text.find('\n', start);
  return text.erase(start, end - start + 1);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* tag)
      : path(fs::temp_directory_path() /
             (std::string("hamflow_test_") + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const char* kDampedConfig = R"json({
  "name": "damped",
  "dimension": 1,
  "system": {"normal_form": {"H": "(x1^2 + p1^2)/2",
                             "terms": [{"mu": "-0.1*p1", "v": "x1"}]}},
  "initial": {"t0": 0.0, "x": [1.0], "p": [0.0]},
  "run": {"t1": 10.0, "h": 0.001},
  "checks": ["energy_balance", "normal_form_consistency"],
  "eta": {"P": "0", "F": ["-x1 - 0.1*p1"], "v": ["p1"]},
  "seed": 2
})json";

}  // namespace

TEST_CASE("built-in scenarios are listed and retrievable") {
  const auto names = scenario::builtin_names();
  REQUIRE(names.size() == 5);
  CHECK(names[0] == "harmonic");
  CHECK(names[1] == "damped");
  CHECK(names[2] == "rotating_frame");
  CHECK(names[3] == "free_hj");
  CHECK(names[4] == "legendre_quadratic");

  // one listing line per scenario
  const auto listing = scenario::builtin_listing();
  CHECK(std::count(listing.begin(), listing.end(), '\n') == 5);

  CHECK_THROWS_AS(scenario::builtin_scenario_json("nope"), Error);
}

TEST_CASE("every built-in scenario runs clean") {
  TempDir dir("builtins");
  for (const auto& name : scenario::builtin_names()) {
    CAPTURE(name);
    const auto report =
        scenario::run(scenario::builtin_scenario_json(name), dir.path.string());
    CHECK(report.passed());
    for (const auto& check : report.checks) {
      CAPTURE(check.name);
      CHECK(check.passed);
      CHECK(check.measured <= check.tolerance);
    }
    CHECK(fs::exists(dir.path / (name + "_trajectory.csv")));
    CHECK(fs::exists(dir.path / (name + "_report.json")));
  }
}

TEST_CASE("harmonic run meets the documented residuals") {
  TempDir dir("harmonic");
  const auto report = scenario::run(scenario::builtin_scenario_json("harmonic"),
                                    dir.path.string());
  REQUIRE(report.checks.size() == 3);
  for (const auto& check : report.checks) {
    if (check.name == "energy_balance") CHECK(check.measured <= 1e-8);
    if (check.name == "classical_reduction") CHECK(check.measured <= 1e-9);
  }

  // CSV header carries the H column for momentum runs
  const auto csv = slurp(dir.path / "harmonic_trajectory.csv");
  CHECK(csv.rfind("t,x1,p1,H\n", 0) == 0);
}

TEST_CASE("damped run meets the documented residuals") {
  TempDir dir("damped");
  const auto report = scenario::run(kDampedConfig, dir.path.string());
  CHECK(report.passed());
  for (const auto& check : report.checks) {
    if (check.name == "energy_balance") CHECK(check.measured <= 1e-6);
  }
}

TEST_CASE("verify runs the pointwise subset only") {
  const auto report = scenario::verify(kDampedConfig);
  REQUIRE(report.checks.size() == 1);  // energy_balance needs a trajectory
  CHECK(report.checks[0].name == "normal_form_consistency");
  CHECK(report.checks[0].passed);
  CHECK(report.trajectory_file.empty());
}

TEST_CASE("verify detects a corrupted normal form") {
  // wrong sign on mu relative to the supplied eta data
  std::string corrupted = kDampedConfig;
  const auto at = corrupted.find("-0.1*p1");
  REQUIRE(at != std::string::npos);
  corrupted.replace(at, 7, "0.1*p1");

  const auto report = scenario::verify(corrupted);
  REQUIRE(report.checks.size() == 1);
  CHECK(!report.checks[0].passed);
  CHECK(report.checks[0].measured > 1e-3);
  CHECK(report.failed_count() == 1);
}

TEST_CASE("config validation errors") {
  auto expect_validation = [](const std::string& config, const char* needle) {
    try {
      scenario::verify(config);
      FAIL_CHECK("expected validation error for ", needle);
    } catch (const Error& e) {
      CAPTURE(e.what());
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  // x[] length mismatch
  expect_validation(R"json({
    "name": "bad", "dimension": 2,
    "system": {"normal_form": {"H": "p1^2 + p2^2", "terms": []}},
    "initial": {"t0": 0, "x": [1.0], "p": [0.0, 0.0]},
    "run": {"t1": 1.0, "h": 0.001},
    "checks": ["canonical_relations"]
  })json",
                    "initial.x");

  // two system variants at once
  expect_validation(R"json({
    "name": "bad", "dimension": 1,
    "system": {"lagrangian": "0.5*v1^2", "normal_form": {"H": "p1^2", "terms": []}},
    "initial": {"t0": 0, "x": [1.0], "v": [0.0]},
    "run": {"t1": 1.0, "h": 0.001},
    "checks": ["canonical_relations"]
  })json",
                    "system");

  // t1 must exceed t0
  expect_validation(R"json({
    "name": "bad", "dimension": 1,
    "system": {"normal_form": {"H": "p1^2", "terms": []}},
    "initial": {"t0": 2.0, "x": [1.0], "p": [0.0]},
    "run": {"t1": 1.0, "h": 0.001},
    "checks": ["canonical_relations"]
  })json",
                    "run.t1");

  // malformed expression points at the field
  expect_validation(R"json({
    "name": "bad", "dimension": 1,
    "system": {"normal_form": {"H": "p1^2 +", "terms": []}},
    "initial": {"t0": 0, "x": [1.0], "p": [0.0]},
    "run": {"t1": 1.0, "h": 0.001},
    "checks": ["canonical_relations"]
  })json",
                    "system.normal_form.H");

  // unknown top-level key
  expect_validation(R"json({
    "name": "bad", "dimension": 1, "unexpected": 1,
    "system": {"normal_form": {"H": "p1^2", "terms": []}},
    "initial": {"t0": 0, "x": [1.0], "p": [0.0]},
    "run": {"t1": 1.0, "h": 0.001},
    "checks": ["canonical_relations"]
  })json",
                    "unexpected");

  // not JSON at all
  expect_validation("not json", "config is not valid JSON");
}

TEST_CASE("unknown check names are rejected with the valid list") {
  std::string config = kDampedConfig;
  const auto at = config.find("energy_balance");
  config.replace(at, 14, "energy_blance!");
  try {
    scenario::run(config, ".");
    FAIL("expected unknown-check error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownCheck);
    CHECK(std::string(e.what()).find("canonical_relations") != std::string::npos);
  }
}

TEST_CASE("reports and trajectories are deterministic") {
  TempDir dir1("det1"), dir2("det2");
  scenario::run(kDampedConfig, dir1.path.string());
  scenario::run(kDampedConfig, dir2.path.string(), 4);  // jobs must not matter

  CHECK(strip_timestamp(slurp(dir1.path / "damped_report.json")) ==
        strip_timestamp(slurp(dir2.path / "damped_report.json")));
  CHECK(slurp(dir1.path / "damped_trajectory.csv") ==
        slurp(dir2.path / "damped_trajectory.csv"));
}

TEST_CASE("HAMFLOW_SEED environment override lands in the report") {
  TempDir dir("seed");
  setenv("HAMFLOW_SEED", "777", 1);
  const auto report = scenario::run(kDampedConfig, dir.path.string());
  unsetenv("HAMFLOW_SEED");
  CHECK(report.seed == 777);
  const auto text = slurp(dir.path / "damped_report.json");
  CHECK(text.find("\"seed\": 777") != std::string::npos);
}

TEST_CASE("report JSON mirrors the result") {
  TempDir dir("report");
  const auto report = scenario::run(kDampedConfig, dir.path.string());
  const auto text = report.to_json();
  CHECK(text.find("\"scenario\": \"damped\"") != std::string::npos);
  CHECK(text.find("\"tool_version\": \"0.1.0\"") != std::string::npos);
  CHECK(text.find("\"trajectory\": \"damped_trajectory.csv\"") != std::string::npos);
  CHECK(text.find("\"status\": \"pass\"") != std::string::npos);
  CHECK(text.find("\"name\": \"energy_balance\"") != std::string::npos);
  CHECK(text.find("\"measured\"") != std::string::npos);
  CHECK(text.find("\"tolerance\"") != std::string::npos);

  // every requested check appears exactly once
  std::size_t count = 0, at = 0;
  while ((at = text.find("\"name\": \"", at)) != std::string::npos) {
    ++count;
    ++at;
  }
  CHECK(count == report.checks.size());
}

TEST_CASE("tolerance overrides apply") {
  std::string config = kDampedConfig;
  config.insert(config.rfind('}'), R"json(, "tolerances": {"energy_balance": 1e-12})json");
  TempDir dir("tol");
  const auto report = scenario::run(config, dir.path.string());
  bool saw = false;
  for (const auto& check : report.checks) {
    if (check.name == "energy_balance") {
      saw = true;
      CHECK(check.tolerance == 1e-12);
      CHECK(!check.passed);  // the honest residual is ~1e-7
    }
  }
  CHECK(saw);
  CHECK(report.failed_count() >= 1);
}

TEST_CASE("verify with no pointwise checks is a validation error") {
  std::string config = R"json({
    "name": "runonly", "dimension": 1,
    "system": {"normal_form": {"H": "(x1^2 + p1^2)/2", "terms": []}},
    "initial": {"t0": 0, "x": [1.0], "p": [0.0]},
    "run": {"t1": 1.0, "h": 0.001},
    "checks": ["energy_balance"]
  })json";
  CHECK_THROWS_AS(scenario::verify(config), Error);
}

TEST_CASE("fundamental form scenarios integrate and check") {
  TempDir dir("ff");
  const char* config = R"json({
    "name": "constant_force", "dimension": 1,
    "system": {"fundamental_form": {"P": "0", "F": ["1"], "p": ["v1"]}},
    "initial": {"t0": 0.0, "x": [0.0], "v": [0.0]},
    "run": {"t1": 1.0, "h": 0.001},
    "checks": ["newtonian_residual", "trajectory_integrability"],
    "seed": 9
  })json";
  const auto report = scenario::run(config, dir.path.string());
  CHECK(report.passed());
  const auto csv = slurp(dir.path / "constant_force_trajectory.csv");
  CHECK(csv.rfind("t,x1,v1\n", 0) == 0);  // no H column for velocity runs
}
