#include "taskbench/world_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "number_format.hpp"
#include "taskbench/error.hpp"

namespace taskbench {

double Rng::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::gaussian() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

std::string_view to_string(MotionKind kind) {
  switch (kind) {
    case MotionKind::move_distance: return "move_distance";
    case MotionKind::rotate_angle: return "rotate_angle";
    case MotionKind::move_next: return "move_next";
  }
  return "move_distance";
}

std::optional<MotionKind> motion_kind_from(std::string_view topic) {
  if (topic == "move_distance") return MotionKind::move_distance;
  if (topic == "rotate_angle") return MotionKind::rotate_angle;
  if (topic == "move_next") return MotionKind::move_next;
  return std::nullopt;
}

std::string_view to_string(ActionStatus status) {
  switch (status) {
    case ActionStatus::completed: return "completed";
    case ActionStatus::obstructed: return "obstructed";
    case ActionStatus::finished_trajectory: return "finished_trajectory";
  }
  return "completed";
}

std::string_view to_string(SensorKind kind) {
  switch (kind) {
    case SensorKind::pose: return "pose";
    case SensorKind::laser: return "laser";
    case SensorKind::object_glimpse: return "object_glimpse";
  }
  return "pose";
}

std::optional<SensorKind> sensor_kind_from(std::string_view topic) {
  if (topic == "pose") return SensorKind::pose;
  if (topic == "laser") return SensorKind::laser;
  if (topic == "object_glimpse") return SensorKind::object_glimpse;
  return std::nullopt;
}

double wall_clearance(const std::vector<Segment>& walls, Vec2 p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& w : walls) best = std::min(best, point_segment_distance(p, w));
  return best;
}

WorldState init_world(const EnvironmentDef& env, const RobotDef& robot, std::uint64_t seed,
                      Localisation localisation) {
  const double clearance = wall_clearance(env.walls, env.start_pose.position());
  if (clearance < robot.radius) {
    throw Error(ErrorCode::InvalidEnvironment,
                "start pose of '" + env.id() + "' is " + detail::format_double(clearance) +
                    " m from a wall, robot radius is " + detail::format_double(robot.radius));
  }
  WorldState s;
  s.env = env;
  s.robot = robot;
  s.localisation = localisation;
  s.seed = seed;
  s.pose_true = env.start_pose;
  s.pose_true.yaw = normalize_angle(s.pose_true.yaw);
  s.pose_odom = s.pose_true;
  s.rng = Rng(seed);
  return s;
}

namespace {

// Odometry follows the commanded relative motion with drift proportional to
// the magnitude of each component.
constexpr double kTransDriftPerMetre = 0.01;
constexpr double kRotDriftPerRadian = 0.005;

void update_odometry(WorldState& s, const Pose2& before, const Pose2& after) {
  if (s.localisation == Localisation::ground_truth) {
    s.pose_odom = s.pose_true;
    return;
  }
  // Motion expressed in the robot frame at `before`.
  const double dx = after.x - before.x;
  const double dy = after.y - before.y;
  const double c = std::cos(before.yaw);
  const double sn = std::sin(before.yaw);
  const double local_x = c * dx + sn * dy;
  const double local_y = -sn * dx + c * dy;
  const double dyaw = normalize_angle(after.yaw - before.yaw);

  const double trans = std::hypot(local_x, local_y);
  const double trans_noise = s.rng.gaussian() * kTransDriftPerMetre * trans;
  const double rot_noise = s.rng.gaussian() * kRotDriftPerRadian * std::abs(dyaw);
  const double scale = trans > 0.0 ? (trans + trans_noise) / trans : 0.0;

  Pose2& o = s.pose_odom;
  const double oc = std::cos(o.yaw);
  const double os = std::sin(o.yaw);
  const double lx = local_x * scale;
  const double ly = local_y * scale;
  o.x += oc * lx - os * ly;
  o.y += os * lx + oc * ly;
  o.yaw = normalize_angle(o.yaw + dyaw + rot_noise);
}

ActionOutcome translate(WorldState& s, double distance) {
  const SimParams& p = s.robot.sim;
  const double radius = s.robot.radius;
  const double total = std::abs(distance);
  const double sign = distance < 0.0 ? -1.0 : 1.0;
  const Vec2 start = s.pose_true.position();
  const Vec2 dir{sign * std::cos(s.pose_true.yaw), sign * std::sin(s.pose_true.yaw)};

  Vec2 cur = start;
  double cur_clear = wall_clearance(s.env.walls, cur);
  double travelled = 0.0;
  bool obstructed = false;
  for (long k = 1; travelled < total; ++k) {
    const double next_t = std::min(static_cast<double>(k) * p.substep, total);
    const Vec2 cand = start + next_t * dir;
    const Segment swept{cur, cand};
    bool ok = true;
    double cand_clear = std::numeric_limits<double>::infinity();
    for (const auto& w : s.env.walls) {
      if (segment_segment_distance(swept, w) < radius) {
        ok = false;
        break;
      }
      cand_clear = std::min(cand_clear, point_segment_distance(cand, w));
    }
    // The margin test tolerates rounding on the closed-form stop distance;
    // the swept test above already guarantees radius clearance.
    if (ok && cand_clear < radius + p.safety_margin - 1e-9 && cand_clear < cur_clear) ok = false;
    if (!ok) {
      obstructed = true;
      break;
    }
    travelled = next_t;
    cur = cand;
    cur_clear = cand_clear;
  }
  s.pose_true.x = cur.x;
  s.pose_true.y = cur.y;
  return {obstructed ? ActionStatus::obstructed : ActionStatus::completed, sign * travelled, 0.0};
}

}  // namespace

ActionOutcome step_motion(WorldState& s, const MotionCommand& cmd, ControlMode mode) {
  if (s.finished) throw Error(ErrorCode::SessionFinished, "trajectory already finished");
  const bool passive_cmd = cmd.kind == MotionKind::move_next;
  if (passive_cmd != (mode == ControlMode::passive)) {
    throw Error(ErrorCode::ModeViolation, std::string(to_string(cmd.kind)) +
                                              " is not available in " +
                                              std::string(to_string(mode)) + " mode");
  }
  if (!passive_cmd) {
    if (!cmd.value) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string(to_string(cmd.kind)) + " needs a numeric value");
    }
    if (!std::isfinite(*cmd.value) || std::abs(*cmd.value) > 100.0) {
      throw Error(ErrorCode::InvalidArgument, "command value must be finite with |value| <= 100");
    }
  }

  const Pose2 before = s.pose_true;
  ActionOutcome outcome;
  switch (cmd.kind) {
    case MotionKind::move_distance:
      outcome = translate(s, *cmd.value);
      break;
    case MotionKind::rotate_angle:
      s.pose_true.yaw = normalize_angle(s.pose_true.yaw + *cmd.value);
      outcome = {ActionStatus::completed, 0.0, *cmd.value};
      break;
    case MotionKind::move_next: {
      if (s.trajectory_cursor >= s.env.trajectory.size()) {
        s.finished = true;
        throw Error(ErrorCode::SessionFinished, "trajectory already finished");
      }
      Pose2 target = s.env.trajectory[s.trajectory_cursor++];
      target.yaw = normalize_angle(target.yaw);
      if (wall_clearance(s.env.walls, target.position()) < s.robot.radius) {
        // Authored content error: flag it and stay put.
        s.collided = true;
        outcome.status = ActionStatus::obstructed;
      } else {
        outcome.distance_travelled = norm(target.position() - before.position());
        outcome.angle_turned = normalize_angle(target.yaw - before.yaw);
        s.pose_true = target;
      }
      if (s.trajectory_cursor == s.env.trajectory.size()) {
        s.finished = true;
        outcome.status = ActionStatus::finished_trajectory;
      }
      break;
    }
  }
  update_odometry(s, before, s.pose_true);
  ++s.step_count;
  return outcome;
}

SensorFrame sense(WorldState& s, std::string_view connection) {
  auto it = s.robot.connections.find(std::string(connection));
  if (it == s.robot.connections.end() || it->second.channel != Channel::sensor) {
    throw Error(ErrorCode::NotFound, "no sensor connection '" + std::string(connection) + "'");
  }
  const auto kind = sensor_kind_from(it->second.backend_topic);
  if (!kind) {
    throw Error(ErrorCode::NotFound, "simulator has no sensor topic '" +
                                         it->second.backend_topic + "'");
  }
  const SimParams& p = s.robot.sim;
  SensorFrame frame;
  frame.kind = *kind;
  switch (*kind) {
    case SensorKind::pose:
      frame.pose = s.localisation == Localisation::noisy ? s.pose_odom : s.pose_true;
      break;
    case SensorKind::laser: {
      const Vec2 origin = s.pose_true.position();
      const int n = p.laser_beams;
      for (int i = 0; i < n; ++i) {
        const double rel = n == 1 ? 0.0
                                  : -std::numbers::pi / 2.0 +
                                        std::numbers::pi * static_cast<double>(i) / (n - 1);
        const double a = s.pose_true.yaw + rel;
        const Vec2 dir{std::cos(a), std::sin(a)};
        double range = p.laser_max_range;
        for (const auto& w : s.env.walls) {
          if (auto d = ray_segment_distance(origin, dir, w)) range = std::min(range, *d);
        }
        frame.laser.push_back({rel, range});
      }
      break;
    }
    case SensorKind::object_glimpse: {
      const Pose2& pose = s.pose_true;
      for (const auto& obj : s.env.objects) {
        const double dx = obj.centroid[0] - pose.x;
        const double dy = obj.centroid[1] - pose.y;
        const double range = std::hypot(dx, dy);
        if (range > p.glimpse_range) continue;
        if (std::abs(normalize_angle(std::atan2(dy, dx) - pose.yaw)) > p.glimpse_half_fov) continue;
        Glimpse g{obj.class_name, obj.centroid, obj.extent, range};
        for (double& c : g.centroid) c += p.glimpse_sigma * s.rng.gaussian();
        frame.glimpses.push_back(std::move(g));
      }
      break;
    }
  }
  return frame;
}

void apply_variant(WorldState& s, const EnvironmentDef& variant) {
  if (variant.name != s.env.name) {
    throw Error(ErrorCode::VariantMismatch, "cannot switch from environment '" + s.env.name +
                                                "' to a variant of '" + variant.name + "'");
  }
  Rng keep = s.rng;
  s = init_world(variant, s.robot, s.seed, s.localisation);
  s.rng = keep;
}

void reset(WorldState& s) { s = init_world(s.env, s.robot, s.seed, s.localisation); }

std::string dump_world(const WorldState& s) {
  using detail::format_double;
  auto pose = [](const Pose2& p) {
    return "[" + format_double(p.x) + ", " + format_double(p.y) + ", " + format_double(p.yaw) +
           "]";
  };
  std::string out = serialize(s.env);
  out += "runtime:\n";
  out += "  robot: " + s.robot.name + "\n";
  out += "  localisation: " + std::string(to_string(s.localisation)) + "\n";
  out += "  seed: " + std::to_string(s.seed) + "\n";
  out += "  pose_true: " + pose(s.pose_true) + "\n";
  out += "  pose_odom: " + pose(s.pose_odom) + "\n";
  out += "  trajectory_cursor: " + std::to_string(s.trajectory_cursor) + "\n";
  out += "  collided: " + std::string(s.collided ? "true" : "false") + "\n";
  out += "  finished: " + std::string(s.finished ? "true" : "false") + "\n";
  out += "  step_count: " + std::to_string(s.step_count) + "\n";
  return out;
}

}  // namespace taskbench
