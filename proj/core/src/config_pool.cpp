#include "taskbench/config_pool.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "number_format.hpp"
#include "taskbench/error.hpp"

namespace taskbench {

using detail::format_double;
namespace fs = std::filesystem;

std::string_view to_string(TaskType v) {
  return v == TaskType::scd ? "scd" : "semantic_slam";
}
std::string_view to_string(ControlMode v) {
  return v == ControlMode::passive ? "passive" : "active";
}
std::string_view to_string(Localisation v) {
  return v == Localisation::noisy ? "noisy" : "ground_truth";
}
std::string_view to_string(PlatformKind v) { return v == PlatformKind::real ? "real" : "sim"; }
std::string_view to_string(Channel v) { return v == Channel::actuator ? "actuator" : "sensor"; }
std::string_view to_string(ObjectState v) {
  switch (v) {
    case ObjectState::added: return "added";
    case ObjectState::removed: return "removed";
    case ObjectState::constant: return "constant";
  }
  return "constant";
}

TaskName parse_task_name(std::string_view name) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : name) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  auto bad = [&](const std::string& why) {
    return Error(ErrorCode::InvalidArgument,
                 "invalid task name '" + std::string(name) + "': " + why);
  };
  if (parts.size() != 3) throw bad("expected <type>:<control_mode>:<localisation>");
  TaskName out{};
  if (parts[0] == "semantic_slam") out.type = TaskType::semantic_slam;
  else if (parts[0] == "scd") out.type = TaskType::scd;
  else throw bad("unknown type '" + parts[0] + "'");
  if (parts[1] == "active") out.control_mode = ControlMode::active;
  else if (parts[1] == "passive") out.control_mode = ControlMode::passive;
  else throw bad("unknown control mode '" + parts[1] + "'");
  if (parts[2] == "ground_truth") out.localisation = Localisation::ground_truth;
  else if (parts[2] == "noisy") out.localisation = Localisation::noisy;
  else throw bad("unknown localisation '" + parts[2] + "'");
  return out;
}

bool EvalMethodDef::supports(TaskType t) const {
  return std::find(task_types.begin(), task_types.end(), t) != task_types.end();
}

namespace {

// ---- parsing helpers -------------------------------------------------------

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    const int line = at.IsDefined() ? at.Mark().line + 1 : 0;
    throw ParseError(origin_, line < 0 ? 0 : line, msg);
  }

  YAML::Node required(const YAML::Node& map, const char* key) const {
    YAML::Node n = map[key];
    if (!n.IsDefined() || n.IsNull()) fail(map, std::string("missing required field '") + key + "'");
    return n;
  }

  template <typename T>
  T scalar(const YAML::Node& n, const char* what) const {
    if (!n.IsScalar()) fail(n, std::string("field '") + what + "' must be a scalar");
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, std::string("field '") + what + "' has the wrong type");
    }
  }

  double number(const YAML::Node& n, const char* what) const {
    double v = scalar<double>(n, what);
    if (!std::isfinite(v)) fail(n, std::string("field '") + what + "' must be finite");
    return v;
  }

  std::vector<double> numbers(const YAML::Node& n, const char* what, std::size_t count) const {
    if (!n.IsSequence() || n.size() != count) {
      fail(n, std::string("field '") + what + "' must be a list of " + std::to_string(count) +
                  " numbers");
    }
    std::vector<double> out;
    for (const auto& e : n) out.push_back(number(e, what));
    return out;
  }

  std::vector<std::string> strings(const YAML::Node& n, const char* what) const {
    if (!n.IsSequence()) fail(n, std::string("field '") + what + "' must be a list");
    std::vector<std::string> out;
    for (const auto& e : n) out.push_back(scalar<std::string>(e, what));
    return out;
  }

  Vec3 vec3(const YAML::Node& n, const char* what) const {
    auto v = numbers(n, what, 3);
    return {v[0], v[1], v[2]};
  }

  Pose2 pose(const YAML::Node& n, const char* what) const {
    auto v = numbers(n, what, 3);
    return {v[0], v[1], v[2]};
  }

  PlatformKind kind(const YAML::Node& n) const {
    auto s = scalar<std::string>(n, "kind");
    if (s == "sim") return PlatformKind::sim;
    if (s == "real") return PlatformKind::real;
    fail(n, "field 'kind' must be 'sim' or 'real'");
  }

  const std::string& origin() const { return origin_; }

 private:
  std::string origin_;
};

YAML::Node load_document(std::string_view text, const Reader& r) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ParseError(r.origin(), e.mark.line + 1, e.msg);
  }
  if (!root.IsMap()) throw ParseError(r.origin(), 1, "expected a mapping at top level");
  return root;
}

// ---- emit helpers ---------------------------------------------------------

void emit_numbers(YAML::Emitter& out, std::initializer_list<double> values) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double v : values) out << format_double(v);
  out << YAML::EndSeq;
}

void emit_strings(YAML::Emitter& out, const std::vector<std::string>& values) {
  out << YAML::Flow << YAML::BeginSeq;
  for (const auto& v : values) out << v;
  out << YAML::EndSeq;
}

std::string finish(const YAML::Emitter& out) {
  if (!out.good()) throw Error(ErrorCode::Internal, out.GetLastError());
  return std::string(out.c_str()) + "\n";
}

bool box_inside(const Box3& b, const Rect& r) {
  const double hx = b.extent[0] / 2.0;
  const double hy = b.extent[1] / 2.0;
  return b.centroid[0] - hx >= r.min_x && b.centroid[0] + hx <= r.max_x &&
         b.centroid[1] - hy >= r.min_y && b.centroid[1] + hy <= r.max_y;
}

}  // namespace

// ---- parsers ---------------------------------------------------------------

TaskDef parse_task(std::string_view yaml, const std::string& origin) {
  Reader r(origin);
  const YAML::Node root = load_document(yaml, r);
  TaskDef t;
  const YAML::Node name = r.required(root, "name");
  t.name = r.scalar<std::string>(name, "name");
  TaskName parsed{};
  try {
    parsed = parse_task_name(t.name);
  } catch (const Error& e) {
    r.fail(name, e.what());
  }
  t.type = parsed.type;
  t.control_mode = parsed.control_mode;
  t.localisation = parsed.localisation;
  t.actions = r.strings(r.required(root, "actions"), "actions");
  t.observations = r.strings(r.required(root, "observations"), "observations");
  t.results_format = r.scalar<std::string>(r.required(root, "results_format"), "results_format");
  t.eval_method = r.scalar<std::string>(r.required(root, "eval_method"), "eval_method");
  const YAML::Node sc = r.required(root, "scene_count");
  t.scene_count = r.scalar<int>(sc, "scene_count");

  const int expected_scenes = t.type == TaskType::scd ? 2 : 1;
  if (t.scene_count != expected_scenes) {
    r.fail(sc, "scene_count must be " + std::to_string(expected_scenes) + " for " +
                   std::string(to_string(t.type)) + " tasks");
  }
  if (t.control_mode == ControlMode::passive &&
      t.actions != std::vector<std::string>{"move_next"}) {
    r.fail(root["actions"], "passive tasks must list exactly [move_next] as actions");
  }
  if (t.control_mode == ControlMode::active) {
    if (t.actions.empty()) r.fail(root["actions"], "active tasks need at least one action");
    if (std::find(t.actions.begin(), t.actions.end(), "move_next") != t.actions.end()) {
      r.fail(root["actions"], "move_next is reserved for passive tasks");
    }
  }
  return t;
}

RobotDef parse_robot(std::string_view yaml, const std::string& origin) {
  Reader r(origin);
  const YAML::Node root = load_document(yaml, r);
  RobotDef robot;
  robot.name = r.scalar<std::string>(r.required(root, "name"), "name");
  robot.kind = r.kind(r.required(root, "kind"));
  if (root["radius"]) {
    robot.radius = r.number(root["radius"], "radius");
    if (robot.radius <= 0.0) r.fail(root["radius"], "radius must be positive");
  }
  const YAML::Node conns = r.required(root, "connections");
  if (!conns.IsMap()) r.fail(conns, "field 'connections' must be a mapping");
  for (const auto& kv : conns) {
    const auto key = r.scalar<std::string>(kv.first, "connections");
    const YAML::Node& c = kv.second;
    if (!c.IsMap()) r.fail(c, "connection '" + key + "' must be a mapping");
    Connection conn;
    const auto channel = r.scalar<std::string>(r.required(c, "channel"), "channel");
    if (channel == "sensor") conn.channel = Channel::sensor;
    else if (channel == "actuator") conn.channel = Channel::actuator;
    else r.fail(c["channel"], "channel must be 'sensor' or 'actuator'");
    conn.backend_topic = r.scalar<std::string>(r.required(c, "backend_topic"), "backend_topic");
    robot.connections.emplace(key, std::move(conn));
  }

  SimParams& p = robot.sim;
  auto opt = [&](const char* key, double& dst, bool positive) {
    if (!root[key]) return;
    dst = r.number(root[key], key);
    if (positive ? dst <= 0.0 : dst < 0.0) {
      r.fail(root[key], std::string("field '") + key + "' out of range");
    }
  };
  opt("substep", p.substep, true);
  opt("safety_margin", p.safety_margin, false);
  opt("laser_max_range", p.laser_max_range, true);
  opt("glimpse_range", p.glimpse_range, true);
  opt("glimpse_half_fov", p.glimpse_half_fov, true);
  opt("glimpse_sigma", p.glimpse_sigma, false);
  if (root["laser_beams"]) {
    p.laser_beams = r.scalar<int>(root["laser_beams"], "laser_beams");
    if (p.laser_beams < 1) r.fail(root["laser_beams"], "laser_beams must be >= 1");
  }
  return robot;
}

EnvironmentDef parse_environment(std::string_view yaml, const std::string& origin) {
  Reader r(origin);
  const YAML::Node root = load_document(yaml, r);
  EnvironmentDef env;
  env.name = r.scalar<std::string>(r.required(root, "name"), "name");
  const YAML::Node variant = r.required(root, "variant");
  env.variant = r.scalar<int>(variant, "variant");
  if (env.variant < 1) r.fail(variant, "variant must be >= 1");
  env.kind = r.kind(r.required(root, "kind"));

  const YAML::Node bounds = r.required(root, "bounds");
  auto b = r.numbers(bounds, "bounds", 4);
  env.bounds = {b[0], b[1], b[2], b[3]};
  if (env.bounds.min_x >= env.bounds.max_x || env.bounds.min_y >= env.bounds.max_y) {
    r.fail(bounds, "bounds must be [min_x, min_y, max_x, max_y] with min < max");
  }

  const YAML::Node walls = r.required(root, "walls");
  if (!walls.IsSequence()) r.fail(walls, "field 'walls' must be a list");
  for (const auto& w : walls) {
    if (!w.IsSequence() || w.size() != 2) r.fail(w, "a wall is [[x1, y1], [x2, y2]]");
    auto a = r.numbers(w[0], "walls", 2);
    auto c = r.numbers(w[1], "walls", 2);
    env.walls.push_back({{a[0], a[1]}, {c[0], c[1]}});
  }

  const YAML::Node start = r.required(root, "start_pose");
  env.start_pose = r.pose(start, "start_pose");
  if (!env.bounds.contains(env.start_pose.position())) r.fail(start, "start_pose outside bounds");

  const YAML::Node traj = r.required(root, "trajectory");
  if (!traj.IsSequence()) r.fail(traj, "field 'trajectory' must be a list");
  for (const auto& p : traj) {
    env.trajectory.push_back(r.pose(p, "trajectory"));
    if (!env.bounds.contains(env.trajectory.back().position())) {
      r.fail(p, "trajectory pose outside bounds");
    }
  }

  env.class_list = r.strings(r.required(root, "class_list"), "class_list");
  std::set<std::string> classes(env.class_list.begin(), env.class_list.end());
  if (classes.size() != env.class_list.size()) {
    r.fail(root["class_list"], "class_list has duplicate entries");
  }

  const YAML::Node objects = r.required(root, "objects");
  if (!objects.IsSequence()) r.fail(objects, "field 'objects' must be a list");
  for (const auto& o : objects) {
    if (!o.IsMap()) r.fail(o, "an object must be a mapping");
    GroundTruthObject obj;
    obj.class_name = r.scalar<std::string>(r.required(o, "class"), "class");
    if (!classes.count(obj.class_name)) {
      r.fail(o["class"], "object class '" + obj.class_name + "' not in class_list");
    }
    obj.centroid = r.vec3(r.required(o, "centroid"), "centroid");
    obj.extent = r.vec3(r.required(o, "extent"), "extent");
    for (double e : obj.extent) {
      if (e <= 0.0) r.fail(o["extent"], "extent components must be positive");
    }
    if (o["state"]) {
      const auto s = r.scalar<std::string>(o["state"], "state");
      if (s == "added") obj.state = ObjectState::added;
      else if (s == "removed") obj.state = ObjectState::removed;
      else if (s == "constant") obj.state = ObjectState::constant;
      else r.fail(o["state"], "state must be added, removed or constant");
    }
    if (!box_inside(obj.box(), env.bounds)) r.fail(o, "object box outside bounds");
    env.objects.push_back(std::move(obj));
  }
  return env;
}

EvalMethodDef parse_eval_method(std::string_view yaml, const std::string& origin) {
  Reader r(origin);
  const YAML::Node root = load_document(yaml, r);
  EvalMethodDef m;
  m.name = r.scalar<std::string>(r.required(root, "name"), "name");
  m.metric = r.scalar<std::string>(r.required(root, "metric"), "metric");
  const YAML::Node types = r.required(root, "task_types");
  for (const auto& s : r.strings(types, "task_types")) {
    if (s == "semantic_slam") m.task_types.push_back(TaskType::semantic_slam);
    else if (s == "scd") m.task_types.push_back(TaskType::scd);
    else r.fail(types, "unknown task type '" + s + "'");
  }
  return m;
}

// ---- emitters --------------------------------------------------------------

std::string serialize(const TaskDef& def) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << def.name;
  out << YAML::Key << "actions" << YAML::Value;
  emit_strings(out, def.actions);
  out << YAML::Key << "observations" << YAML::Value;
  emit_strings(out, def.observations);
  out << YAML::Key << "results_format" << YAML::Value << def.results_format;
  out << YAML::Key << "eval_method" << YAML::Value << def.eval_method;
  out << YAML::Key << "scene_count" << YAML::Value << def.scene_count;
  out << YAML::EndMap;
  return finish(out);
}

std::string serialize(const RobotDef& def) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << def.name;
  out << YAML::Key << "kind" << YAML::Value << std::string(to_string(def.kind));
  out << YAML::Key << "radius" << YAML::Value << format_double(def.radius);
  out << YAML::Key << "substep" << YAML::Value << format_double(def.sim.substep);
  out << YAML::Key << "safety_margin" << YAML::Value << format_double(def.sim.safety_margin);
  out << YAML::Key << "laser_beams" << YAML::Value << def.sim.laser_beams;
  out << YAML::Key << "laser_max_range" << YAML::Value << format_double(def.sim.laser_max_range);
  out << YAML::Key << "glimpse_range" << YAML::Value << format_double(def.sim.glimpse_range);
  out << YAML::Key << "glimpse_half_fov" << YAML::Value << format_double(def.sim.glimpse_half_fov);
  out << YAML::Key << "glimpse_sigma" << YAML::Value << format_double(def.sim.glimpse_sigma);
  out << YAML::Key << "connections" << YAML::Value << YAML::BeginMap;
  for (const auto& [name, conn] : def.connections) {
    out << YAML::Key << name << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "channel" << YAML::Value << std::string(to_string(conn.channel));
    out << YAML::Key << "backend_topic" << YAML::Value << conn.backend_topic;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  out << YAML::EndMap;
  return finish(out);
}

std::string serialize(const EnvironmentDef& def) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << def.name;
  out << YAML::Key << "variant" << YAML::Value << def.variant;
  out << YAML::Key << "kind" << YAML::Value << std::string(to_string(def.kind));
  out << YAML::Key << "bounds" << YAML::Value;
  emit_numbers(out, {def.bounds.min_x, def.bounds.min_y, def.bounds.max_x, def.bounds.max_y});
  out << YAML::Key << "walls" << YAML::Value << YAML::BeginSeq;
  for (const auto& w : def.walls) {
    out << YAML::Flow << YAML::BeginSeq;
    emit_numbers(out, {w.a.x, w.a.y});
    emit_numbers(out, {w.b.x, w.b.y});
    out << YAML::EndSeq;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "start_pose" << YAML::Value;
  emit_numbers(out, {def.start_pose.x, def.start_pose.y, def.start_pose.yaw});
  out << YAML::Key << "trajectory" << YAML::Value << YAML::BeginSeq;
  for (const auto& p : def.trajectory) emit_numbers(out, {p.x, p.y, p.yaw});
  out << YAML::EndSeq;
  out << YAML::Key << "class_list" << YAML::Value;
  emit_strings(out, def.class_list);
  out << YAML::Key << "objects" << YAML::Value << YAML::BeginSeq;
  for (const auto& o : def.objects) {
    out << YAML::BeginMap;
    out << YAML::Key << "class" << YAML::Value << o.class_name;
    out << YAML::Key << "centroid" << YAML::Value;
    emit_numbers(out, {o.centroid[0], o.centroid[1], o.centroid[2]});
    out << YAML::Key << "extent" << YAML::Value;
    emit_numbers(out, {o.extent[0], o.extent[1], o.extent[2]});
    out << YAML::Key << "state" << YAML::Value << std::string(to_string(o.state));
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
  return finish(out);
}

std::string serialize(const EvalMethodDef& def) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << def.name;
  out << YAML::Key << "metric" << YAML::Value << def.metric;
  std::vector<std::string> types;
  for (auto t : def.task_types) types.emplace_back(to_string(t));
  out << YAML::Key << "task_types" << YAML::Value;
  emit_strings(out, types);
  out << YAML::EndMap;
  return finish(out);
}

// ---- pools -----------------------------------------------------------------

namespace {

std::vector<fs::path> definition_files(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".yaml" || ext == ".yml") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ParseError(p.string(), 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename Def, typename Parse, typename Key>
void load_kind(const fs::path& dir, std::map<std::string, Def>& into,
               std::map<std::string, fs::path>& origins, Parse parse, Key key,
               LoadMode mode, std::vector<PoolIssue>& issues) {
  for (const auto& file : definition_files(dir)) {
    Def def;
    try {
      def = parse(read_file(file), file.string());
    } catch (const ParseError& e) {
      if (mode == LoadMode::strict) throw;
      issues.push_back({file, e.what()});
      continue;
    }
    const std::string id = key(def);
    if (auto it = origins.find(id); it != origins.end()) {
      throw Error(ErrorCode::DuplicateDefinition,
                  "duplicate definition '" + id + "' in " + file.string() + " (first defined in " +
                      it->second.string() + ")");
    }
    origins.emplace(id, file);
    into.emplace(id, std::move(def));
  }
}

}  // namespace

Pools load_pool(const fs::path& root, LoadMode mode) {
  Pools pools;
  for (const char* sub : {"tasks", "robots", "environments", "eval_methods"}) {
    if (!fs::is_directory(root / sub)) {
      throw Error(ErrorCode::NotFound,
                  "pool root " + root.string() + " has no '" + sub + "' directory");
    }
  }
  std::map<std::string, fs::path> origins;
  load_kind(root / "tasks", pools.tasks, origins, parse_task,
            [](const TaskDef& d) { return d.name; }, mode, pools.issues);
  origins.clear();
  load_kind(root / "robots", pools.robots, origins, parse_robot,
            [](const RobotDef& d) { return d.name; }, mode, pools.issues);
  origins.clear();
  load_kind(root / "environments", pools.environments, origins, parse_environment,
            [](const EnvironmentDef& d) { return d.id(); }, mode, pools.issues);
  origins.clear();
  load_kind(root / "eval_methods", pools.eval_methods, origins, parse_eval_method,
            [](const EvalMethodDef& d) { return d.name; }, mode, pools.issues);
  return pools;
}

namespace {

std::string file_stem_for(std::string id) {
  std::replace(id.begin(), id.end(), ':', '_');
  return id;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + p.string());
  out << text;
}

}  // namespace

void save_pool(const Pools& pools, const fs::path& root) {
  for (const char* sub : {"tasks", "robots", "environments", "eval_methods"}) {
    fs::create_directories(root / sub);
  }
  for (const auto& [id, d] : pools.tasks)
    write_text(root / "tasks" / (file_stem_for(id) + ".yaml"), serialize(d));
  for (const auto& [id, d] : pools.robots)
    write_text(root / "robots" / (file_stem_for(id) + ".yaml"), serialize(d));
  for (const auto& [id, d] : pools.environments)
    write_text(root / "environments" / (file_stem_for(id) + ".yaml"), serialize(d));
  for (const auto& [id, d] : pools.eval_methods)
    write_text(root / "eval_methods" / (file_stem_for(id) + ".yaml"), serialize(d));
}

std::vector<std::string> list_options(const Pools& pools, PoolKind kind) {
  std::vector<std::string> ids;
  auto keys = [&ids](const auto& m) {
    for (const auto& kv : m) ids.push_back(kv.first);
  };
  switch (kind) {
    case PoolKind::tasks: keys(pools.tasks); break;
    case PoolKind::robots: keys(pools.robots); break;
    case PoolKind::environments: keys(pools.environments); break;
    case PoolKind::eval_methods: keys(pools.eval_methods); break;
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::optional<std::string> find_clearance_violation(const EnvironmentDef& env, double radius) {
  auto check = [&](const Pose2& p, const std::string& what) -> std::optional<std::string> {
    if (!env.bounds.contains(p.position())) return what + " lies outside the bounds";
    for (std::size_t i = 0; i < env.walls.size(); ++i) {
      const double d = point_segment_distance(p.position(), env.walls[i]);
      if (d < radius) {
        return what + " is " + format_double(d) + " m from wall " + std::to_string(i) +
               " (robot radius " + format_double(radius) + " m)";
      }
    }
    return std::nullopt;
  };
  if (auto v = check(env.start_pose, "start pose")) return v;
  for (std::size_t i = 0; i < env.trajectory.size(); ++i) {
    if (auto v = check(env.trajectory[i], "trajectory pose " + std::to_string(i))) return v;
  }
  return std::nullopt;
}

ResolvedConfig validate_selection(const Pools& pools, const std::string& task_id,
                                  const std::string& robot_id,
                                  const std::vector<std::string>& env_ids, std::uint64_t seed) {
  auto task_it = pools.tasks.find(task_id);
  if (task_it == pools.tasks.end()) {
    throw Error(ErrorCode::NotFound, "unknown task '" + task_id + "'");
  }
  auto robot_it = pools.robots.find(robot_id);
  if (robot_it == pools.robots.end()) {
    throw Error(ErrorCode::NotFound, "unknown robot '" + robot_id + "'");
  }
  const TaskDef& task = task_it->second;
  const RobotDef& robot = robot_it->second;

  ResolvedConfig cfg;
  for (const auto& id : env_ids) {
    auto it = pools.environments.find(id);
    if (it == pools.environments.end()) {
      throw Error(ErrorCode::NotFound, "unknown environment '" + id + "'");
    }
    cfg.environments.push_back(it->second);
  }
  if (static_cast<int>(env_ids.size()) != task.scene_count) {
    throw Error(ErrorCode::SceneCountMismatch,
                "task '" + task.name + "' needs " + std::to_string(task.scene_count) +
                    " environment(s), got " + std::to_string(env_ids.size()));
  }
  for (const auto& env : cfg.environments) {
    if (env.kind != robot.kind) {
      throw Error(ErrorCode::IncompatibleSelection,
                  "incompatible selection: " + std::string(to_string(robot.kind)) + " robot '" +
                      robot.name + "' cannot run in " + std::string(to_string(env.kind)) +
                      " environment '" + env.id() + "'");
    }
  }
  if (cfg.environments.size() == 2) {
    const auto& a = cfg.environments[0];
    const auto& b = cfg.environments[1];
    if (a.name != b.name || a.variant == b.variant) {
      throw Error(ErrorCode::IncompatibleSelection,
                  "incompatible selection: scene change detection needs two variants of one "
                  "environment, got '" + a.id() + "' and '" + b.id() + "'");
    }
    if (a.class_list != b.class_list) {
      throw Error(ErrorCode::IncompatibleSelection,
                  "incompatible selection: '" + a.id() + "' and '" + b.id() +
                      "' have different class lists");
    }
  }
  auto require = [&](const std::vector<std::string>& names, Channel channel) {
    for (const auto& n : names) {
      auto it = robot.connections.find(n);
      if (it == robot.connections.end() || it->second.channel != channel) {
        throw Error(ErrorCode::CapabilityMissing,
                    "robot '" + robot.name + "' has no " + std::string(to_string(channel)) +
                        " connection '" + n + "' required by task '" + task.name + "'");
      }
    }
  };
  require(task.actions, Channel::actuator);
  require(task.observations, Channel::sensor);

  auto method = pools.eval_methods.find(task.eval_method);
  if (method == pools.eval_methods.end() || !method->second.supports(task.type)) {
    throw Error(ErrorCode::NotFound, "no evaluation method '" + task.eval_method +
                                         "' for task '" + task.name + "'");
  }
  for (const auto& env : cfg.environments) {
    if (auto v = find_clearance_violation(env, robot.radius)) {
      throw Error(ErrorCode::InvalidEnvironment, "environment '" + env.id() + "': " + *v);
    }
  }
  cfg.task = task;
  cfg.robot = robot;
  cfg.eval_method = task.eval_method;
  cfg.seed = seed;
  return cfg;
}

}  // namespace taskbench
