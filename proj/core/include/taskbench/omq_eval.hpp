#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "taskbench/config_pool.hpp"
#include "taskbench/geometry.hpp"
#include "taskbench/results.hpp"

namespace taskbench {

/// Report schema tag; bump when any scoring formula changes.
inline constexpr const char* kOmqMetric = "omq-v1";

/// Axis-aligned intersection over union. Extents must be positive.
double iou3d(const Box3& a, const Box3& b);

struct PairwiseQuality {
  double label_q = 0.0;
  double spatial_q = 0.0;
  std::optional<double> state_q;  // scene change detection only
  double overall_q = 0.0;         // geometric mean of the present components
};

/// Quality of one proposal against one ground-truth object. `class_list` is
/// the list the proposal's label_probs are aligned to.
PairwiseQuality pairwise_quality(const ObjectProposal& proposal,
                                 const std::vector<std::string>& class_list,
                                 const GroundTruthObject& gt, TaskType task_type);

using QualityMatrix = std::vector<std::vector<double>>;  // [proposal][gt]

struct Match {
  std::size_t proposal = 0;
  std::size_t gt = 0;

  friend bool operator==(const Match&, const Match&) = default;
};

/// Maximum-total-quality one-to-one matching (Hungarian method on 1 - q over
/// the zero-padded square matrix). Zero-quality pairs are dropped. Result is
/// ordered by proposal index.
std::vector<Match> assign(const QualityMatrix& quality);

struct TruePositive {
  std::size_t proposal = 0;
  std::size_t gt = 0;
  PairwiseQuality quality;
};

struct ComponentMeans {
  std::optional<double> label;
  std::optional<double> spatial;
  std::optional<double> state;
};

struct EvalReport {
  std::string task_name;
  double score = 0.0;
  std::vector<TruePositive> true_positives;
  std::vector<std::size_t> false_positives;  // proposal indices
  std::vector<std::size_t> false_negatives;  // ground-truth indices
  ComponentMeans component_means;
};

/// Objects that differ between two variants: present only in `second` are
/// `added`, only in `first` are `removed`. Objects match on class and a
/// centroid within 0.01 m. Removed objects come first, each group in file
/// order.
std::vector<GroundTruthObject> derive_changes(const EnvironmentDef& first,
                                              const EnvironmentDef& second);

/// Scores a proposal map against an explicit ground-truth list.
EvalReport evaluate_objects(const ResultsFile& results, const std::vector<GroundTruthObject>& gts,
                            TaskType task_type);

/// Scores a results file against the scene(s) it was produced in: the
/// object list for semantic SLAM, the derived change set for scene change
/// detection. Throws SchemaMismatch on inconsistent inputs.
EvalReport evaluate(const ResultsFile& results, const std::vector<EnvironmentDef>& scenes,
                    TaskType task_type);

struct Summary {
  double mean_score = 0.0;
  std::vector<double> scores;
};

/// Throws EmptyInput for an empty span.
Summary summarise(std::span<const EvalReport> reports);

nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const Summary& summary);

}  // namespace taskbench
