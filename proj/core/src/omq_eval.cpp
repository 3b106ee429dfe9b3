#include "taskbench/omq_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "taskbench/error.hpp"

namespace taskbench {

using nlohmann::json;

double iou3d(const Box3& a, const Box3& b) {
  double inter = 1.0;
  for (int k = 0; k < 3; ++k) {
    const double lo = std::max(a.centroid[k] - a.extent[k] / 2.0, b.centroid[k] - b.extent[k] / 2.0);
    const double hi = std::min(a.centroid[k] + a.extent[k] / 2.0, b.centroid[k] + b.extent[k] / 2.0);
    if (hi <= lo) return 0.0;
    inter *= hi - lo;
  }
  const double vol_a = a.extent[0] * a.extent[1] * a.extent[2];
  const double vol_b = b.extent[0] * b.extent[1] * b.extent[2];
  return std::clamp(inter / (vol_a + vol_b - inter), 0.0, 1.0);
}

PairwiseQuality pairwise_quality(const ObjectProposal& proposal,
                                 const std::vector<std::string>& class_list,
                                 const GroundTruthObject& gt, TaskType task_type) {
  if (proposal.label_probs.size() != class_list.size()) {
    throw Error(ErrorCode::SchemaMismatch,
                "label_probs has " + std::to_string(proposal.label_probs.size()) +
                    " entries for a class list of " + std::to_string(class_list.size()));
  }
  auto cls = std::find(class_list.begin(), class_list.end(), gt.class_name);
  if (cls == class_list.end()) {
    throw Error(ErrorCode::SchemaMismatch,
                "ground-truth class '" + gt.class_name + "' missing from the class list");
  }
  PairwiseQuality q;
  q.label_q = proposal.label_probs[static_cast<std::size_t>(cls - class_list.begin())];
  q.spatial_q = iou3d(proposal.box(), gt.box());
  double product = q.label_q * q.spatial_q;
  int components = 2;
  if (task_type == TaskType::scd) {
    if (!proposal.state_probs) {
      throw Error(ErrorCode::SchemaMismatch, "scene change proposals need state_probs");
    }
    q.state_q = proposal.state_probs->of(gt.state);
    product *= *q.state_q;
    components = 3;
  }
  if (q.spatial_q == 0.0 || product == 0.0) {
    q.overall_q = 0.0;
  } else {
    q.overall_q = std::pow(product, 1.0 / components);
  }
  return q;
}

namespace {

// O(n^3) shortest augmenting path Hungarian method on a square cost matrix.
// Returns column assigned to each row.
std::vector<std::size_t> hungarian_min(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match_row(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match_row[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match_row[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match_row[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match_row[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match_row[j0] = match_row[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[match_row[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

std::vector<Match> assign(const QualityMatrix& quality) {
  const std::size_t rows = quality.size();
  const std::size_t cols = rows ? quality.front().size() : 0;
  for (const auto& row : quality) {
    if (row.size() != cols) throw Error(ErrorCode::InvalidArgument, "ragged quality matrix");
  }
  const std::size_t n = std::max(rows, cols);
  if (n == 0) return {};
  // Dummies have quality 0, i.e. cost 1.
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) cost[i][j] = 1.0 - quality[i][j];
  }
  const auto row_to_col = hungarian_min(cost);
  std::vector<Match> out;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t j = row_to_col[i];
    if (j < cols && quality[i][j] > 0.0) out.push_back({i, j});
  }
  return out;
}

std::vector<GroundTruthObject> derive_changes(const EnvironmentDef& first,
                                              const EnvironmentDef& second) {
  constexpr double kSameObjectTolerance = 0.01;
  auto same = [](const GroundTruthObject& a, const GroundTruthObject& b) {
    const double d = std::hypot(a.centroid[0] - b.centroid[0], a.centroid[1] - b.centroid[1],
                                a.centroid[2] - b.centroid[2]);
    return a.class_name == b.class_name && d <= kSameObjectTolerance;
  };
  std::vector<char> second_used(second.objects.size(), 0);
  std::vector<GroundTruthObject> changes;
  for (const auto& a : first.objects) {
    bool found = false;
    for (std::size_t j = 0; j < second.objects.size(); ++j) {
      if (!second_used[j] && same(a, second.objects[j])) {
        second_used[j] = 1;
        found = true;
        break;
      }
    }
    if (!found) {
      GroundTruthObject removed = a;
      removed.state = ObjectState::removed;
      changes.push_back(std::move(removed));
    }
  }
  for (std::size_t j = 0; j < second.objects.size(); ++j) {
    if (second_used[j]) continue;
    GroundTruthObject added = second.objects[j];
    added.state = ObjectState::added;
    changes.push_back(std::move(added));
  }
  return changes;
}

EvalReport evaluate_objects(const ResultsFile& results, const std::vector<GroundTruthObject>& gts,
                            TaskType task_type) {
  QualityMatrix quality(results.objects.size(), std::vector<double>(gts.size(), 0.0));
  std::vector<std::vector<PairwiseQuality>> detail(results.objects.size(),
                                                   std::vector<PairwiseQuality>(gts.size()));
  for (std::size_t p = 0; p < results.objects.size(); ++p) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      detail[p][g] = pairwise_quality(results.objects[p], results.class_list, gts[g], task_type);
      quality[p][g] = detail[p][g].overall_q;
    }
  }

  EvalReport report;
  report.task_name = results.task_name;
  std::vector<char> proposal_matched(results.objects.size(), 0);
  std::vector<char> gt_matched(gts.size(), 0);
  double numerator = 0.0;
  for (const auto& m : assign(quality)) {
    report.true_positives.push_back({m.proposal, m.gt, detail[m.proposal][m.gt]});
    proposal_matched[m.proposal] = 1;
    gt_matched[m.gt] = 1;
    numerator += quality[m.proposal][m.gt];
  }
  for (std::size_t p = 0; p < proposal_matched.size(); ++p) {
    if (!proposal_matched[p]) report.false_positives.push_back(p);
  }
  for (std::size_t g = 0; g < gt_matched.size(); ++g) {
    if (!gt_matched[g]) report.false_negatives.push_back(g);
  }
  const std::size_t denominator = report.true_positives.size() + report.false_positives.size() +
                                  report.false_negatives.size();
  // Nothing to find and nothing reported counts as a perfect map.
  report.score = denominator == 0 ? 1.0 : numerator / static_cast<double>(denominator);

  if (!report.true_positives.empty()) {
    double label = 0.0, spatial = 0.0, state = 0.0;
    for (const auto& tp : report.true_positives) {
      label += tp.quality.label_q;
      spatial += tp.quality.spatial_q;
      state += tp.quality.state_q.value_or(0.0);
    }
    const double n = static_cast<double>(report.true_positives.size());
    report.component_means.label = label / n;
    report.component_means.spatial = spatial / n;
    if (task_type == TaskType::scd) report.component_means.state = state / n;
  }
  return report;
}

EvalReport evaluate(const ResultsFile& results, const std::vector<EnvironmentDef>& scenes,
                    TaskType task_type) {
  const std::size_t expected = task_type == TaskType::scd ? 2 : 1;
  if (scenes.size() != expected) {
    throw Error(ErrorCode::SchemaMismatch, "evaluation needs " + std::to_string(expected) +
                                               " scene(s), got " + std::to_string(scenes.size()));
  }
  try {
    validate_results(results);
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaMismatch, e.what());
  }
  if (parse_task_name(results.task_name).type != task_type) {
    throw Error(ErrorCode::SchemaMismatch, "results are for task '" + results.task_name +
                                               "', not " + std::string(to_string(task_type)));
  }
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto& ref = results.environment_details[i];
    if (ref.name != scenes[i].name || ref.variant != scenes[i].variant) {
      throw Error(ErrorCode::SchemaMismatch, "results were produced in '" + ref.id() +
                                                 "' but scored against '" + scenes[i].id() + "'");
    }
  }
  if (results.class_list != scenes.front().class_list) {
    throw Error(ErrorCode::SchemaMismatch,
                "results class_list differs from environment '" + scenes.front().id() + "'");
  }
  const auto gts = task_type == TaskType::scd ? derive_changes(scenes[0], scenes[1])
                                              : scenes.front().objects;
  return evaluate_objects(results, gts, task_type);
}

Summary summarise(std::span<const EvalReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::EmptyInput, "no reports to summarise");
  Summary s;
  double total = 0.0;
  for (const auto& r : reports) {
    s.scores.push_back(r.score);
    total += r.score;
  }
  s.mean_score = total / static_cast<double>(reports.size());
  return s;
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const EvalReport& r) {
  json tps = json::array();
  for (const auto& tp : r.true_positives) {
    tps.push_back({{"proposal", tp.proposal},
                   {"gt", tp.gt},
                   {"label_q", tp.quality.label_q},
                   {"spatial_q", tp.quality.spatial_q},
                   {"state_q", optional_number(tp.quality.state_q)},
                   {"overall_q", tp.quality.overall_q}});
  }
  return {{"metric", kOmqMetric},
          {"task_name", r.task_name},
          {"score", r.score},
          {"true_positives", std::move(tps)},
          {"false_positives", r.false_positives},
          {"false_negatives", r.false_negatives},
          {"component_means",
           {{"label", optional_number(r.component_means.label)},
            {"spatial", optional_number(r.component_means.spatial)},
            {"state", optional_number(r.component_means.state)}}}};
}

json to_json(const Summary& s) {
  return {{"metric", kOmqMetric}, {"mean_score", s.mean_score}, {"per_report", s.scores}};
}

}  // namespace taskbench
