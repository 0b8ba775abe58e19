// Drives the hamflow binary end to end: subcommands, exit codes, files.

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

// Runs the CLI with stdout+stderr captured through a temp file.
CommandResult run_cli(const std::string& args) {
  const fs::path capture =
      fs::temp_directory_path() / ("hamflow_cli_out_" + std::to_string(::getpid()));
  const std::string command =
      std::string(HAMFLOW_CLI_PATH) + " " + args + " > " + capture.string() + " 2>&1";
  const int raw = std::system(command.c_str());
  CommandResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(capture);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  result.output = buffer.str();
  fs::remove(capture);
  return result;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* tag)
      : path(fs::temp_directory_path() /
             (std::string("hamflow_cli_") + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("list prints one line per built-in scenario") {
  const auto result = run_cli("list");
  CHECK(result.exit_code == 0);
  CHECK(std::count(result.output.begin(), result.output.end(), '\n') == 5);
  CHECK(result.output.find("harmonic") != std::string::npos);
  CHECK(result.output.find("damped") != std::string::npos);
  CHECK(result.output.find("rotating_frame") != std::string::npos);
  CHECK(result.output.find("free_hj") != std::string::npos);
  CHECK(result.output.find("legendre_quadratic") != std::string::npos);
}

TEST_CASE("run on a built-in scenario writes files and exits 0") {
  TempDir dir("run");
  const auto result = run_cli("run harmonic --out " + dir.path.string());
  CAPTURE(result.output);
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("energy_balance") != std::string::npos);
  CHECK(result.output.find("result: pass") != std::string::npos);
  CHECK(fs::exists(dir.path / "harmonic_trajectory.csv"));
  CHECK(fs::exists(dir.path / "harmonic_report.json"));
}

TEST_CASE("run on a config file") {
  TempDir dir("file");
  const fs::path config = dir.path / "osc.json";
  std::ofstream(config) << R"json({
    "name": "osc", "dimension": 1,
    "system": {"normal_form": {"H": "(x1^2 + p1^2)/2",
                               "terms": [{"mu": "-0.1*p1", "v": "x1"}]}},
    "initial": {"t0": 0.0, "x": [1.0], "p": [0.0]},
    "run": {"t1": 10.0, "h": 0.001},
    "checks": ["energy_balance"],
    "seed": 3
  })json";
  const auto result = run_cli("run " + config.string() + " --out " + dir.path.string());
  CAPTURE(result.output);
  CHECK(result.exit_code == 0);
  CHECK(fs::exists(dir.path / "osc_trajectory.csv"));

  // CSV rows are full-precision and parse back
  std::ifstream csv(dir.path / "osc_trajectory.csv");
  std::string header, first;
  std::getline(csv, header);
  std::getline(csv, first);
  CHECK(header == "t,x1,p1,H");
  CHECK(first.rfind("0,1,0,0.5", 0) == 0);
}

TEST_CASE("check failure exits 2") {
  TempDir dir("fail");
  const fs::path config = dir.path / "tight.json";
  std::ofstream(config) << R"json({
    "name": "tight", "dimension": 1,
    "system": {"normal_form": {"H": "(x1^2 + p1^2)/2",
                               "terms": [{"mu": "-0.1*p1", "v": "x1"}]}},
    "initial": {"t0": 0.0, "x": [1.0], "p": [0.0]},
    "run": {"t1": 10.0, "h": 0.001},
    "checks": ["energy_balance"],
    "tolerances": {"energy_balance": 1e-30},
    "seed": 3
  })json";
  const auto result = run_cli("run " + config.string() + " --out " + dir.path.string());
  CHECK(result.exit_code == 2);
  CHECK(result.output.find("fail") != std::string::npos);
}

TEST_CASE("config errors exit 1") {
  TempDir dir("bad");
  const fs::path config = dir.path / "bad.json";
  std::ofstream(config) << R"json({
    "name": "bad", "dimension": 2,
    "system": {"normal_form": {"H": "p1^2 + p2^2", "terms": []}},
    "initial": {"t0": 0.0, "x": [1.0], "p": [0.0, 0.0]},
    "run": {"t1": 1.0, "h": 0.001},
    "checks": ["canonical_relations"]
  })json";
  const auto result = run_cli("run " + config.string() + " --out " + dir.path.string());
  CHECK(result.exit_code == 1);
  CHECK(result.output.find("initial.x") != std::string::npos);

  const auto missing = run_cli("run does_not_exist.json --out " + dir.path.string());
  CHECK(missing.exit_code == 1);
}

TEST_CASE("verify subcommand") {
  const auto result = run_cli("verify free_hj");
  CAPTURE(result.output);
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("hj_residual") != std::string::npos);
  CHECK(result.output.find("result: pass") != std::string::npos);
}

TEST_CASE("unknown subcommand prints usage and exits 1") {
  const auto result = run_cli("frobnicate");
  CHECK(result.exit_code == 1);
  CHECK(result.output.find("Usage") != std::string::npos);
}

TEST_CASE("repeat runs are byte-identical apart from the timestamp") {
  TempDir dir1("rep1"), dir2("rep2");
  run_cli("run damped --out " + dir1.path.string());
  run_cli("run damped --out " + dir2.path.string());

  auto slurp_without_timestamp = [](const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream keep;
    std::string line;
    while (std::getline(in, line)) {
      if (line.find("generated_at") != std::string::npos) continue;
      keep << line << "\n";
    }
    return keep.str();
  };
  CHECK(slurp_without_timestamp(dir1.path / "damped_report.json") ==
        slurp_without_timestamp(dir2.path / "damped_report.json"));

  std::ifstream a(dir1.path / "damped_trajectory.csv"), b(dir2.path / "damped_trajectory.csv");
  std::ostringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
}
