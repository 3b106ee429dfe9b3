#include "taskbench/results.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "taskbench/error.hpp"

namespace taskbench {

using nlohmann::json;

namespace {

constexpr double kProbSlack = 1e-6;

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::ResultValidationError, "results field '" + field + "' " + why);
}

json vec3_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

const json& member(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) invalid(where, "must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) invalid(where.empty() ? key : where + "." + key, "is missing");
  return *it;
}

std::string string_at(const json& j, const std::string& field) {
  if (!j.is_string()) invalid(field, "must be a string");
  return j.get<std::string>();
}

double number_at(const json& j, const std::string& field) {
  if (!j.is_number()) invalid(field, "must be a number");
  return j.get<double>();
}

Vec3 vec3_at(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) invalid(field, "must be a list of 3 numbers");
  return {number_at(j[0], field + "[0]"), number_at(j[1], field + "[1]"),
          number_at(j[2], field + "[2]")};
}

}  // namespace

json to_json(const ResultsFile& r) {
  json envs = json::array();
  for (const auto& e : r.environment_details) envs.push_back({{"name", e.name}, {"variant", e.variant}});
  json objects = json::array();
  for (const auto& o : r.objects) {
    json obj = {{"label_probs", o.label_probs},
                {"centroid", vec3_json(o.centroid)},
                {"extent", vec3_json(o.extent)}};
    if (o.state_probs) {
      obj["state_probs"] = {{"added", o.state_probs->added},
                            {"removed", o.state_probs->removed},
                            {"constant", o.state_probs->constant}};
    }
    objects.push_back(std::move(obj));
  }
  return {{"task_details", {{"name", r.task_name}, {"results_format", r.results_format}}},
          {"environment_details", std::move(envs)},
          {"class_list", r.class_list},
          {"objects", std::move(objects)}};
}

ResultsFile results_from_json(const json& j) {
  if (!j.is_object()) invalid("<root>", "must be an object");
  ResultsFile r;
  const json& task = member(j, "task_details", "");
  r.task_name = string_at(member(task, "name", "task_details"), "task_details.name");
  r.results_format =
      string_at(member(task, "results_format", "task_details"), "task_details.results_format");

  const json& envs = member(j, "environment_details", "");
  if (!envs.is_array()) invalid("environment_details", "must be a list");
  for (std::size_t i = 0; i < envs.size(); ++i) {
    const std::string where = "environment_details[" + std::to_string(i) + "]";
    EnvironmentRef ref;
    ref.name = string_at(member(envs[i], "name", where), where + ".name");
    const json& v = member(envs[i], "variant", where);
    if (!v.is_number_integer()) invalid(where + ".variant", "must be an integer");
    ref.variant = v.get<int>();
    r.environment_details.push_back(std::move(ref));
  }

  const json& classes = member(j, "class_list", "");
  if (!classes.is_array()) invalid("class_list", "must be a list");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    r.class_list.push_back(string_at(classes[i], "class_list[" + std::to_string(i) + "]"));
  }

  const json& objects = member(j, "objects", "");
  if (!objects.is_array()) invalid("objects", "must be a list");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string where = "objects[" + std::to_string(i) + "]";
    const json& o = objects[i];
    ObjectProposal p;
    const json& labels = member(o, "label_probs", where);
    if (!labels.is_array()) invalid(where + ".label_probs", "must be a list");
    for (std::size_t k = 0; k < labels.size(); ++k) {
      p.label_probs.push_back(
          number_at(labels[k], where + ".label_probs[" + std::to_string(k) + "]"));
    }
    p.centroid = vec3_at(member(o, "centroid", where), where + ".centroid");
    p.extent = vec3_at(member(o, "extent", where), where + ".extent");
    if (auto it = o.find("state_probs"); it != o.end() && !it->is_null()) {
      const std::string sw = where + ".state_probs";
      StateProbs s;
      s.added = number_at(member(*it, "added", sw), sw + ".added");
      s.removed = number_at(member(*it, "removed", sw), sw + ".removed");
      s.constant = number_at(member(*it, "constant", sw), sw + ".constant");
      p.state_probs = s;
    }
    r.objects.push_back(std::move(p));
  }
  validate_results(r);
  return r;
}

void validate_results(const ResultsFile& r) {
  TaskName task{};
  try {
    task = parse_task_name(r.task_name);
  } catch (const Error& e) {
    invalid("task_details.name", std::string("is not a task identifier: ") + e.what());
  }
  const std::size_t scenes = task.type == TaskType::scd ? 2 : 1;
  if (r.environment_details.size() != scenes) {
    invalid("environment_details", "must list " + std::to_string(scenes) + " environment(s)");
  }
  auto check_probs = [](const std::vector<double>& probs, const std::string& field) {
    double sum = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
      const double p = probs[k];
      if (!(p >= 0.0 && p <= 1.0)) {
        invalid(field + "[" + std::to_string(k) + "]", "must lie in [0, 1]");
      }
      sum += p;
    }
    if (sum > 1.0 + kProbSlack) invalid(field, "sums to more than 1");
  };
  for (std::size_t i = 0; i < r.objects.size(); ++i) {
    const std::string where = "objects[" + std::to_string(i) + "]";
    const auto& o = r.objects[i];
    if (o.label_probs.size() != r.class_list.size()) {
      invalid(where + ".label_probs", "must have one entry per class_list entry (" +
                                          std::to_string(r.class_list.size()) + ")");
    }
    check_probs(o.label_probs, where + ".label_probs");
    for (int k = 0; k < 3; ++k) {
      if (!std::isfinite(o.centroid[k])) {
        invalid(where + ".centroid[" + std::to_string(k) + "]", "must be finite");
      }
      if (!(o.extent[k] > 0.0) || !std::isfinite(o.extent[k])) {
        invalid(where + ".extent[" + std::to_string(k) + "]", "must be positive");
      }
    }
    if (task.type == TaskType::scd) {
      if (!o.state_probs) invalid(where + ".state_probs", "is required for scene change detection");
      const auto& s = *o.state_probs;
      check_probs({s.added, s.removed, s.constant}, where + ".state_probs");
    } else if (o.state_probs) {
      invalid(where + ".state_probs", "is only allowed for scene change detection");
    }
  }
}

ResultsFile read_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ResultValidationError, "cannot read results file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ResultValidationError,
                "results file " + path.string() + " is not valid JSON: " + e.what());
  }
  try {
    return results_from_json(j);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_json_atomic(const std::filesystem::path& path, const json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + tmp.string());
    out << doc.dump(2) << "\n";
    if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_results_atomic(const std::filesystem::path& path, const ResultsFile& r) {
  write_json_atomic(path, to_json(r));
}

ResultsFile prefilled_results(const std::string& task_name, const std::string& results_format,
                              const std::vector<EnvironmentRef>& environments,
                              const std::vector<std::string>& class_list) {
  ResultsFile r;
  r.task_name = task_name;
  r.results_format = results_format;
  r.environment_details = environments;
  r.class_list = class_list;
  return r;
}

}  // namespace taskbench
