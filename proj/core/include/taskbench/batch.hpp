#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "taskbench/config_pool.hpp"
#include "taskbench/omq_eval.hpp"
#include "taskbench/results.hpp"

namespace taskbench {

inline constexpr const char* kHarnessVersion = "0.1.0";

/// Picks the evaluation method from the results' task identifier and scores
/// the file against the ground truth of the environments it names. Throws
/// NotFound ("no evaluation method ...") and SchemaMismatch.
EvalReport score_results(const Pools& pools, const ResultsFile& results);

/// Splits a batch environment entry. Scene change detection entries join
/// their two variants with '+', e.g. `house:1+house:2`.
std::vector<std::string> split_scene_ids(const std::string& entry);

struct BatchSpec {
  std::string task_id;
  std::string robot_id;
  std::vector<std::string> env_ids;  // one entry per run, see split_scene_ids
  std::string command;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;

  std::string host = "127.0.0.1";
  int port = 10000;
  std::chrono::seconds submission_timeout{0};
};

struct ProfileEntry {
  std::string env_id;
  std::string results_path;  // relative to the output directory
  std::string report_path;
  std::optional<double> score;
  std::string error;  // empty on success
};

struct PerformanceProfile {
  std::vector<ProfileEntry> entries;
  std::optional<double> mean_score;  // over scored entries
  std::string created_at;
  std::string harness_version = kHarnessVersion;

  std::size_t scored() const;
};

nlohmann::json to_json(const PerformanceProfile& profile);

/// Runs every entry in order: fresh supervisor seeded with `seed + index`,
/// the submission, supervisor shutdown, evaluation. Failed entries are kept
/// with a null score. Writes results, reports and `profile.json` under
/// `output_dir`. Throws before running anything if any entry fails
/// validate_selection.
PerformanceProfile run_batch(const Pools& pools, const BatchSpec& spec, std::ostream* log = nullptr);

}  // namespace taskbench
