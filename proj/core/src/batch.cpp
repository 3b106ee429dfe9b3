#include "taskbench/batch.hpp"

#include <cstdio>
#include <ctime>
#include <ostream>

#include "taskbench/client.hpp"
#include "taskbench/error.hpp"
#include "taskbench/supervisor.hpp"

namespace taskbench {

namespace fs = std::filesystem;
using nlohmann::json;

EvalReport score_results(const Pools& pools, const ResultsFile& results) {
  auto no_method = [&] {
    return Error(ErrorCode::NotFound,
                 "no evaluation method for task '" + results.task_name + "'");
  };
  auto task = pools.tasks.find(results.task_name);
  if (task == pools.tasks.end()) throw no_method();
  auto method = pools.eval_methods.find(task->second.eval_method);
  if (method == pools.eval_methods.end() || !method->second.supports(task->second.type) ||
      method->second.metric != kOmqMetric) {
    throw no_method();
  }
  std::vector<EnvironmentDef> scenes;
  for (const auto& ref : results.environment_details) {
    auto env = pools.environments.find(ref.id());
    if (env == pools.environments.end()) {
      throw Error(ErrorCode::NotFound, "results name unknown environment '" + ref.id() + "'");
    }
    scenes.push_back(env->second);
  }
  return evaluate(results, scenes, task->second.type);
}

std::vector<std::string> split_scene_ids(const std::string& entry) {
  std::vector<std::string> ids;
  std::size_t start = 0;
  for (;;) {
    const auto plus = entry.find('+', start);
    ids.push_back(entry.substr(start, plus == std::string::npos ? std::string::npos : plus - start));
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  return ids;
}

std::size_t PerformanceProfile::scored() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.score.has_value();
  return n;
}

json to_json(const PerformanceProfile& p) {
  json entries = json::array();
  for (const auto& e : p.entries) {
    json entry = {{"env_id", e.env_id},
                  {"results_path", e.results_path},
                  {"report_path", e.report_path},
                  {"score", e.score ? json(*e.score) : json(nullptr)}};
    if (!e.error.empty()) entry["error"] = e.error;
    entries.push_back(std::move(entry));
  }
  return {{"entries", std::move(entries)},
          {"mean_score", p.mean_score ? json(*p.mean_score) : json(nullptr)},
          {"created_at", p.created_at},
          {"harness_version", p.harness_version}};
}

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string entry_dir_name(std::size_t index, std::string env_id) {
  for (char& c : env_id) {
    if (c == ':' || c == '+' || c == '/') c = '_';
  }
  char prefix[32];
  std::snprintf(prefix, sizeof prefix, "%03zu_", index);
  return prefix + env_id;
}

// Binds on `port`, or on `port + 1` when the first bind fails.
std::unique_ptr<Supervisor> start_supervisor(const ResolvedConfig& config, const BatchSpec& spec) {
  auto sup = std::make_unique<Supervisor>(config);
  try {
    sup->start(spec.host, spec.port);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AddrInUse) throw;
    sup->start(spec.host, spec.port + 1);
  }
  return sup;
}

}  // namespace

PerformanceProfile run_batch(const Pools& pools, const BatchSpec& spec, std::ostream* log) {
  if (spec.env_ids.empty()) throw Error(ErrorCode::InvalidArgument, "batch has no environments");
  std::vector<ResolvedConfig> configs;
  for (std::size_t i = 0; i < spec.env_ids.size(); ++i) {
    configs.push_back(validate_selection(pools, spec.task_id, spec.robot_id,
                                         split_scene_ids(spec.env_ids[i]), spec.seed + i));
  }
  fs::create_directories(spec.output_dir);

  PerformanceProfile profile;
  profile.created_at = utc_timestamp();
  double total = 0.0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    ProfileEntry entry;
    entry.env_id = spec.env_ids[i];
    const std::string dir = entry_dir_name(i, entry.env_id);
    fs::create_directories(spec.output_dir / dir);
    entry.results_path = dir + "/results.json";
    entry.report_path = dir + "/report.json";
    const fs::path results_file = spec.output_dir / entry.results_path;
    const fs::path report_file = spec.output_dir / entry.report_path;

    try {
      ResultsFile results;
      {
        auto sup = start_supervisor(configs[i], spec);
        SubmissionOptions opts;
        opts.timeout = spec.submission_timeout;
        results = run_submission(spec.command, {spec.host, sup->port()}, results_file, opts);
        sup->stop();
      }
      const EvalReport report = score_results(pools, results);
      write_json_atomic(report_file, to_json(report));
      entry.score = report.score;
      total += report.score;
      if (log) *log << "[" << (i + 1) << "/" << configs.size() << "] " << entry.env_id
                    << " score " << report.score << "\n";
    } catch (const std::exception& e) {
      entry.error = e.what();
      if (log) *log << "[" << (i + 1) << "/" << configs.size() << "] " << entry.env_id
                    << " FAILED: " << e.what() << "\n";
    }
    profile.entries.push_back(std::move(entry));
  }
  if (profile.scored() > 0) profile.mean_score = total / static_cast<double>(profile.scored());
  write_json_atomic(spec.output_dir / "profile.json", to_json(profile));
  return profile;
}

}  // namespace taskbench
