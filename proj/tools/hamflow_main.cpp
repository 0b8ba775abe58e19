// hamflow command-line front end. Talks to the core library exclusively
// through the C API in hamflow/hamflow.h.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hamflow/hamflow.h"

namespace {

struct StringDeleter {
  void operator()(char* s) const { hamflow_string_free(s); }
};
using ApiString = std::unique_ptr<char, StringDeleter>;

// Resolves the config argument: an existing file wins, otherwise a
// built-in scenario name is accepted.
bool load_config(const std::string& arg, std::string& config_json) {
  if (std::filesystem::exists(arg)) {
    std::ifstream in(arg);
    if (!in) {
      std::fprintf(stderr, "error: cannot read '%s'\n", arg.c_str());
      return false;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    config_json = buffer.str();
    return true;
  }
  char* raw = nullptr;
  if (hamflow_builtin_scenario(arg.c_str(), &raw) == HAMFLOW_OK) {
    ApiString text(raw);
    config_json = text.get();
    return true;
  }
  std::fprintf(stderr, "error: '%s' is neither a config file nor a built-in scenario\n",
               arg.c_str());
  return false;
}

void print_report(const std::string& report_json) {
  nlohmann::json report;
  try {
    report = nlohmann::json::parse(report_json);
  } catch (const nlohmann::json::parse_error&) {
    std::fprintf(stderr, "error: malformed report\n");
    return;
  }
  std::printf("scenario: %s\n", report.value("scenario", std::string("?")).c_str());
  for (const auto& check : report.value("checks", nlohmann::json::array())) {
    std::printf("  %-26s %-4s  measured %.6e  tol %.1e\n",
                check.value("name", std::string("?")).c_str(),
                check.value("status", std::string("?")).c_str(),
                check.value("measured", 0.0), check.value("tolerance", 0.0));
  }
  const std::string trajectory = report.contains("trajectory") && !report["trajectory"].is_null()
                                     ? report["trajectory"].get<std::string>()
                                     : std::string();
  if (!trajectory.empty()) {
    std::printf("trajectory: %s\n", trajectory.c_str());
  }
  std::printf("result: %s\n", report.value("status", std::string("?")).c_str());
}

// 0 = all checks passed, 2 = at least one check failed, 1 = anything else.
int finish(hamflow_status status, const ApiString& report) {
  if (report) print_report(report.get());
  if (status == HAMFLOW_OK) return 0;
  if (status == HAMFLOW_ERR_CHECK_FAILED) return 2;
  std::fprintf(stderr, "error: %s\n", hamflow_last_error());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hamflow - generalized Hamiltonian mechanics toolkit"};
  app.set_version_flag("--version", hamflow_version());
  app.require_subcommand(1);

  std::string config_arg;
  std::string out_dir = ".";
  int jobs = 1;

  auto* run_cmd = app.add_subcommand(
      "run", "Integrate a scenario, write trajectory and report, run its checks");
  run_cmd->add_option("config", config_arg, "Scenario JSON file or built-in name")
      ->required();
  run_cmd->add_option("--out", out_dir, "Output directory (default: .)");
  run_cmd->add_option("--jobs", jobs, "Run independent checks concurrently");

  auto* verify_cmd = app.add_subcommand(
      "verify", "Run only the pointwise/identity checks of a scenario");
  verify_cmd->add_option("config", config_arg, "Scenario JSON file or built-in name")
      ->required();
  verify_cmd->add_option("--jobs", jobs, "Run independent checks concurrently");

  auto* list_cmd = app.add_subcommand("list", "List built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::fputs(app.help().c_str(), stderr);
    return 1;
  }

  if (list_cmd->parsed()) {
    char* raw = nullptr;
    if (hamflow_builtin_list(&raw) != HAMFLOW_OK) {
      std::fprintf(stderr, "error: %s\n", hamflow_last_error());
      return 1;
    }
    ApiString listing(raw);
    std::fputs(listing.get(), stdout);
    return 0;
  }

  std::string config_json;
  if (!load_config(config_arg, config_json)) return 1;

  int failed = 0;
  char* raw_report = nullptr;
  hamflow_status status;
  if (run_cmd->parsed()) {
    status = hamflow_run(config_json.c_str(), out_dir.c_str(), jobs, &failed,
                         &raw_report);
  } else {
    status = hamflow_verify(config_json.c_str(), jobs, &failed, &raw_report);
  }
  ApiString report(raw_report);
  return finish(status, report);
}
