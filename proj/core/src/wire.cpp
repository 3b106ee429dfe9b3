#include "taskbench/wire.hpp"

#include <array>

namespace taskbench {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateDefinition: return "DuplicateDefinition";
    case ErrorCode::IncompatibleSelection: return "IncompatibleSelection";
    case ErrorCode::SceneCountMismatch: return "SceneCountMismatch";
    case ErrorCode::CapabilityMissing: return "CapabilityMissing";
    case ErrorCode::InvalidEnvironment: return "InvalidEnvironment";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ModeViolation: return "ModeViolation";
    case ErrorCode::SessionFinished: return "SessionFinished";
    case ErrorCode::VariantMismatch: return "VariantMismatch";
    case ErrorCode::WrongChannel: return "WrongChannel";
    case ErrorCode::Busy: return "Busy";
    case ErrorCode::NoMoreScenes: return "NoMoreScenes";
    case ErrorCode::NotSupported: return "NotSupported";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::AddrInUse: return "AddrInUse";
    case ErrorCode::ConnectionError: return "ConnectionError";
    case ErrorCode::SupervisorUnhealthy: return "SupervisorUnhealthy";
    case ErrorCode::ObservationError: return "ObservationError";
    case ErrorCode::AgentError: return "AgentError";
    case ErrorCode::ResultValidationError: return "ResultValidationError";
    case ErrorCode::SubmissionFailed: return "SubmissionFailed";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::Internal: return "Internal";
  }
  return "Internal";
}

}  // namespace taskbench

namespace taskbench::wire {

using nlohmann::json;

namespace {

json pose_json(const Pose2& p) { return {{"x", p.x}, {"y", p.y}, {"yaw", p.yaw}}; }

Pose2 pose_from(const json& j) {
  return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("yaw").get<double>()};
}

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::BadRequest, "expected 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

json to_json(const SensorFrame& f) {
  json out = {{"kind", to_string(f.kind)}};
  switch (f.kind) {
    case SensorKind::pose:
      out["pose"] = pose_json(f.pose);
      break;
    case SensorKind::laser: {
      json beams = json::array();
      for (const auto& b : f.laser) beams.push_back({{"angle", b.angle}, {"range", b.range}});
      out["laser"] = std::move(beams);
      break;
    }
    case SensorKind::object_glimpse: {
      json gl = json::array();
      for (const auto& g : f.glimpses) {
        gl.push_back({{"class", g.class_name},
                      {"centroid", g.centroid},
                      {"extent", g.extent},
                      {"range", g.range}});
      }
      out["glimpses"] = std::move(gl);
      break;
    }
  }
  return out;
}

SensorFrame sensor_frame_from_json(const json& j) {
  try {
    SensorFrame f;
    const auto kind = sensor_kind_from(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::BadRequest, "unknown sensor frame kind");
    f.kind = *kind;
    switch (f.kind) {
      case SensorKind::pose:
        f.pose = pose_from(j.at("pose"));
        break;
      case SensorKind::laser:
        for (const auto& b : j.at("laser")) {
          f.laser.push_back({b.at("angle").get<double>(), b.at("range").get<double>()});
        }
        break;
      case SensorKind::object_glimpse:
        for (const auto& g : j.at("glimpses")) {
          f.glimpses.push_back({g.at("class").get<std::string>(), vec3_from(g.at("centroid")),
                                vec3_from(g.at("extent")), g.at("range").get<double>()});
        }
        break;
    }
    return f;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("malformed sensor frame: ") + e.what());
  }
}

json to_json(const ActionOutcome& o) {
  return {{"status", to_string(o.status)},
          {"distance_travelled", o.distance_travelled},
          {"angle_turned", o.angle_turned}};
}

ActionOutcome action_outcome_from_json(const json& j) {
  try {
    ActionOutcome o;
    const auto status = j.at("status").get<std::string>();
    if (status == "completed") o.status = ActionStatus::completed;
    else if (status == "obstructed") o.status = ActionStatus::obstructed;
    else if (status == "finished_trajectory") o.status = ActionStatus::finished_trajectory;
    else throw Error(ErrorCode::BadRequest, "unknown action status '" + status + "'");
    o.distance_travelled = j.at("distance_travelled").get<double>();
    o.angle_turned = j.at("angle_turned").get<double>();
    return o;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("malformed action outcome: ") + e.what());
  }
}

json to_json(const TaskDef& t) {
  return {{"name", t.name},
          {"type", to_string(t.type)},
          {"control_mode", to_string(t.control_mode)},
          {"localisation", to_string(t.localisation)},
          {"actions", t.actions},
          {"observations", t.observations},
          {"results_format", t.results_format},
          {"eval_method", t.eval_method},
          {"scene_count", t.scene_count}};
}

json to_json(const RobotDef& r) {
  json conns = json::object();
  for (const auto& [name, c] : r.connections) {
    conns[name] = {{"channel", to_string(c.channel)}, {"backend_topic", c.backend_topic}};
  }
  return {{"name", r.name},
          {"kind", to_string(r.kind)},
          {"radius", r.radius},
          {"connections", std::move(conns)}};
}

json public_environment(const EnvironmentDef& e) {
  json walls = json::array();
  for (const auto& w : e.walls) walls.push_back({{w.a.x, w.a.y}, {w.b.x, w.b.y}});
  json traj = json::array();
  for (const auto& p : e.trajectory) traj.push_back(pose_json(p));
  return {{"name", e.name},
          {"variant", e.variant},
          {"kind", to_string(e.kind)},
          {"bounds", {e.bounds.min_x, e.bounds.min_y, e.bounds.max_x, e.bounds.max_y}},
          {"walls", std::move(walls)},
          {"start_pose", pose_json(e.start_pose)},
          {"trajectory", std::move(traj)},
          {"class_list", e.class_list}};
}

json public_config(const ResolvedConfig& c) {
  json envs = json::array();
  for (const auto& e : c.environments) envs.push_back(public_environment(e));
  return {{"protocol_version", kProtocolVersion},
          {"task", to_json(c.task)},
          {"robot", to_json(c.robot)},
          {"environments", std::move(envs)},
          {"eval_method", c.eval_method},
          {"seed", c.seed},
          {"scene_count", c.task.scene_count}};
}

json ok(json payload) { return {{"result", std::move(payload)}}; }

json error(std::string_view code, const std::string& message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::WrongChannel:
    case ErrorCode::ModeViolation:
    case ErrorCode::BadRequest:
    case ErrorCode::InvalidArgument:
    case ErrorCode::NotSupported:
    case ErrorCode::VariantMismatch: return 400;
    case ErrorCode::Busy:
    case ErrorCode::NoMoreScenes: return 409;
    case ErrorCode::SessionFinished: return 410;
    default: return 500;
  }
}

ErrorCode error_code_from(std::string_view code) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::Internal); ++i) {
    const auto c = static_cast<ErrorCode>(i);
    if (to_string(c) == code) return c;
  }
  return ErrorCode::Internal;
}

}  // namespace taskbench::wire
