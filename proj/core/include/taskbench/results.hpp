#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "taskbench/config_pool.hpp"
#include "taskbench/geometry.hpp"

namespace taskbench {

struct StateProbs {
  double added = 0.0;
  double removed = 0.0;
  double constant = 0.0;

  double of(ObjectState s) const {
    switch (s) {
      case ObjectState::added: return added;
      case ObjectState::removed: return removed;
      case ObjectState::constant: return constant;
    }
    return 0.0;
  }
  friend bool operator==(const StateProbs&, const StateProbs&) = default;
};

/// One entry of a solution's object map.
struct ObjectProposal {
  std::vector<double> label_probs;  // aligned to ResultsFile::class_list
  Vec3 centroid{};
  Vec3 extent{};
  std::optional<StateProbs> state_probs;  // scene change detection only

  Box3 box() const { return {centroid, extent}; }
  friend bool operator==(const ObjectProposal&, const ObjectProposal&) = default;
};

struct EnvironmentRef {
  std::string name;
  int variant = 1;

  std::string id() const { return name + ":" + std::to_string(variant); }
  friend bool operator==(const EnvironmentRef&, const EnvironmentRef&) = default;
};

struct ResultsFile {
  std::string task_name;
  std::string results_format;
  std::vector<EnvironmentRef> environment_details;
  std::vector<std::string> class_list;
  std::vector<ObjectProposal> objects;

  friend bool operator==(const ResultsFile&, const ResultsFile&) = default;
};

nlohmann::json to_json(const ResultsFile& results);

/// Decodes and validates. Throws Error(ResultValidationError) naming the
/// offending field.
ResultsFile results_from_json(const nlohmann::json& j);

/// Throws Error(ResultValidationError) naming the offending field.
void validate_results(const ResultsFile& results);

ResultsFile read_results(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames over `path`.
void write_results_atomic(const std::filesystem::path& path, const ResultsFile& results);

/// Writes any JSON document atomically with a trailing newline.
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& doc);

/// Empty object map carrying the metadata of a resolved configuration.
ResultsFile prefilled_results(const std::string& task_name, const std::string& results_format,
                              const std::vector<EnvironmentRef>& environments,
                              const std::vector<std::string>& class_list);

}  // namespace taskbench
