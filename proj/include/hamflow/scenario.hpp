#ifndef HAMFLOW_SCENARIO_HPP
#define HAMFLOW_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace hamflow::scenario {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
};

struct Report {
  std::string scenario;
  std::string tool_version;
  std::uint64_t seed = 0;
  std::string trajectory_file;  // empty when no trajectory was written
  std::vector<CheckResult> checks;

  bool passed() const;
  int failed_count() const;

  // Stable-key JSON; the generated_at field is the only
  // non-deterministic part and can be omitted.
  std::string to_json(bool include_timestamp = true) const;
};

// Parses, validates and runs a scenario: integrates the system, writes
// <name>_trajectory.csv and <name>_report.json under out_dir, and runs
// every requested check. The HAMFLOW_SEED environment variable
// overrides the config seed.
Report run(const std::string& config_json, const std::string& out_dir, int jobs = 1);

// Runs only the pointwise/identity checks of the scenario, with no time
// integration and no files written. It is an error if the scenario
// requests no pointwise checks.
Report verify(const std::string& config_json, int jobs = 1);

// Built-in scenario catalog.
std::vector<std::string> builtin_names();
std::string builtin_scenario_json(const std::string& name);
std::string builtin_listing();

// Names accepted in a scenario's checks array.
std::vector<std::string> known_check_names();

}  // namespace hamflow::scenario

#endif  // HAMFLOW_SCENARIO_HPP
