#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "taskbench/geometry.hpp"

namespace taskbench {

enum class TaskType { semantic_slam, scd };
enum class ControlMode { active, passive };
enum class Localisation { ground_truth, noisy };
enum class PlatformKind { sim, real };
enum class Channel { sensor, actuator };
enum class ObjectState { added, removed, constant };

std::string_view to_string(TaskType v);
std::string_view to_string(ControlMode v);
std::string_view to_string(Localisation v);
std::string_view to_string(PlatformKind v);
std::string_view to_string(Channel v);
std::string_view to_string(ObjectState v);

struct TaskName {
  TaskType type;
  ControlMode control_mode;
  Localisation localisation;
};

/// Parses `<type>:<control_mode>:<localisation>`; throws Error(InvalidArgument).
TaskName parse_task_name(std::string_view name);

struct TaskDef {
  std::string name;
  TaskType type = TaskType::semantic_slam;
  ControlMode control_mode = ControlMode::active;
  Localisation localisation = Localisation::ground_truth;
  std::vector<std::string> actions;
  std::vector<std::string> observations;
  std::string results_format;
  std::string eval_method;
  int scene_count = 1;

  friend bool operator==(const TaskDef&, const TaskDef&) = default;
};

struct Connection {
  Channel channel = Channel::sensor;
  std::string backend_topic;

  friend bool operator==(const Connection&, const Connection&) = default;
};

/// Simulator tuning carried by a robot definition. Every field may be
/// overridden in the robot file.
struct SimParams {
  double substep = 0.01;
  double safety_margin = 0.01;
  int laser_beams = 31;
  double laser_max_range = 10.0;
  double glimpse_range = 3.0;
  double glimpse_half_fov = std::numbers::pi / 4.0;
  double glimpse_sigma = 0.02;

  friend bool operator==(const SimParams&, const SimParams&) = default;
};

struct RobotDef {
  std::string name;
  PlatformKind kind = PlatformKind::sim;
  double radius = 0.2;
  std::map<std::string, Connection> connections;
  SimParams sim;

  friend bool operator==(const RobotDef&, const RobotDef&) = default;
};

struct GroundTruthObject {
  std::string class_name;
  Vec3 centroid{};
  Vec3 extent{};
  ObjectState state = ObjectState::constant;

  Box3 box() const { return {centroid, extent}; }
  friend bool operator==(const GroundTruthObject&, const GroundTruthObject&) = default;
};

struct EnvironmentDef {
  std::string name;
  int variant = 1;
  PlatformKind kind = PlatformKind::sim;
  Rect bounds;
  std::vector<Segment> walls;
  Pose2 start_pose;
  std::vector<Pose2> trajectory;
  std::vector<GroundTruthObject> objects;
  std::vector<std::string> class_list;

  /// Pool key, `name:variant`.
  std::string id() const { return name + ":" + std::to_string(variant); }
  friend bool operator==(const EnvironmentDef&, const EnvironmentDef&) = default;
};

struct EvalMethodDef {
  std::string name;
  std::string metric;
  std::vector<TaskType> task_types;

  bool supports(TaskType t) const;
  friend bool operator==(const EvalMethodDef&, const EvalMethodDef&) = default;
};

struct PoolIssue {
  std::filesystem::path file;
  std::string message;
};

struct Pools {
  std::map<std::string, TaskDef> tasks;
  std::map<std::string, RobotDef> robots;
  std::map<std::string, EnvironmentDef> environments;
  std::map<std::string, EvalMethodDef> eval_methods;
  /// Files that failed to load in lenient mode.
  std::vector<PoolIssue> issues;

  bool same_definitions(const Pools& other) const {
    return tasks == other.tasks && robots == other.robots &&
           environments == other.environments && eval_methods == other.eval_methods;
  }
};

struct ResolvedConfig {
  TaskDef task;
  RobotDef robot;
  std::vector<EnvironmentDef> environments;
  std::string eval_method;
  std::uint64_t seed = 0;

  friend bool operator==(const ResolvedConfig&, const ResolvedConfig&) = default;
};

enum class PoolKind { tasks, robots, environments, eval_methods };

enum class LoadMode {
  strict,   // first bad file throws
  lenient,  // bad files land in Pools::issues
};

// Single-definition parsers and emitters. `origin` names the source in
// ParseError messages.
TaskDef parse_task(std::string_view yaml, const std::string& origin = "<string>");
RobotDef parse_robot(std::string_view yaml, const std::string& origin = "<string>");
EnvironmentDef parse_environment(std::string_view yaml,
                                 const std::string& origin = "<string>");
EvalMethodDef parse_eval_method(std::string_view yaml,
                                const std::string& origin = "<string>");

std::string serialize(const TaskDef& def);
std::string serialize(const RobotDef& def);
std::string serialize(const EnvironmentDef& def);
std::string serialize(const EvalMethodDef& def);

/// Loads `<root>/{tasks,robots,environments,eval_methods}/*.yaml`.
/// Throws DuplicateDefinition on identifier clashes and, in strict mode,
/// ParseError on the first malformed file.
Pools load_pool(const std::filesystem::path& root, LoadMode mode = LoadMode::strict);

/// Writes one file per definition under `root`, creating the subdirectories.
void save_pool(const Pools& pools, const std::filesystem::path& root);

std::vector<std::string> list_options(const Pools& pools, PoolKind kind);

/// Resolves a user selection into a runnable configuration or throws
/// NotFound / SceneCountMismatch / IncompatibleSelection / CapabilityMissing /
/// InvalidEnvironment.
ResolvedConfig validate_selection(const Pools& pools, const std::string& task_id,
                                  const std::string& robot_id,
                                  const std::vector<std::string>& env_ids,
                                  std::uint64_t seed = 0);

/// Returns a description of the first start/trajectory pose that is outside
/// the bounds or within `radius` of a wall.
std::optional<std::string> find_clearance_violation(const EnvironmentDef& env,
                                                    double radius);

}  // namespace taskbench
