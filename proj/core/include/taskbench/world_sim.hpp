#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "taskbench/config_pool.hpp"
#include "taskbench/geometry.hpp"

namespace taskbench {

/// Seeded generator whose output sequence is fixed by the standard
/// (mt19937_64 plus a hand-rolled Box-Muller), so traces reproduce across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform();
  double gaussian();

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

enum class MotionKind { move_distance, rotate_angle, move_next };

std::string_view to_string(MotionKind kind);
std::optional<MotionKind> motion_kind_from(std::string_view topic);

struct MotionCommand {
  MotionKind kind = MotionKind::move_distance;
  /// Metres for move_distance, radians for rotate_angle, absent for move_next.
  std::optional<double> value;
};

enum class ActionStatus { completed, obstructed, finished_trajectory };

std::string_view to_string(ActionStatus status);

struct ActionOutcome {
  ActionStatus status = ActionStatus::completed;
  double distance_travelled = 0.0;
  double angle_turned = 0.0;

  friend bool operator==(const ActionOutcome&, const ActionOutcome&) = default;
};

enum class SensorKind { pose, laser, object_glimpse };

std::string_view to_string(SensorKind kind);
std::optional<SensorKind> sensor_kind_from(std::string_view topic);

struct LaserBeam {
  double angle = 0.0;  // relative to heading
  double range = 0.0;

  friend bool operator==(const LaserBeam&, const LaserBeam&) = default;
};

struct Glimpse {
  std::string class_name;
  Vec3 centroid{};
  Vec3 extent{};
  double range = 0.0;

  friend bool operator==(const Glimpse&, const Glimpse&) = default;
};

struct SensorFrame {
  SensorKind kind = SensorKind::pose;
  Pose2 pose;                     // pose frames only
  std::vector<LaserBeam> laser;   // laser frames only
  std::vector<Glimpse> glimpses;  // object_glimpse frames only

  friend bool operator==(const SensorFrame&, const SensorFrame&) = default;
};

struct WorldState {
  EnvironmentDef env;
  RobotDef robot;
  Localisation localisation = Localisation::ground_truth;
  std::uint64_t seed = 0;

  Pose2 pose_true;
  Pose2 pose_odom;
  std::size_t trajectory_cursor = 0;
  bool collided = false;
  bool finished = false;
  int step_count = 0;
  Rng rng;

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

/// Throws InvalidEnvironment if the start pose is within the robot radius of
/// a wall.
WorldState init_world(const EnvironmentDef& env, const RobotDef& robot, std::uint64_t seed,
                      Localisation localisation = Localisation::ground_truth);

/// Executes one motion command in place.
///
/// Translation is integrated in `substep` increments along the heading and
/// stops at the last increment whose swept path keeps the robot disc clear of
/// every wall and whose endpoint keeps `safety_margin` extra clearance (or
/// does not lose clearance when already inside the margin). Early stops
/// report `obstructed`; `collided` is left untouched because the collision
/// never happened.
///
/// Throws ModeViolation, SessionFinished or InvalidArgument.
ActionOutcome step_motion(WorldState& state, const MotionCommand& cmd, ControlMode mode);

/// Reads the sensor wired to `connection` on the state's robot. Glimpse reads
/// draw from the state's generator. Throws NotFound for anything that is not
/// a sensor connection.
SensorFrame sense(WorldState& state, std::string_view connection);

/// Swaps in another variant of the same environment, keeping the generator
/// state. Throws VariantMismatch when the names differ.
void apply_variant(WorldState& state, const EnvironmentDef& variant);

/// Back to `init_world(state.env, state.robot, state.seed)`.
void reset(WorldState& state);

/// Smallest distance from `p` to any wall, +inf with no walls.
double wall_clearance(const std::vector<Segment>& walls, Vec2 p);

/// Debug dump: the environment file schema plus a `runtime` section.
std::string dump_world(const WorldState& state);

}  // namespace taskbench
