#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "taskbench/config_pool.hpp"
#include "taskbench/error.hpp"
#include "taskbench/world_sim.hpp"

// JSON shapes shared by the supervisor and the client.
namespace taskbench::wire {

inline constexpr const char* kProtocolVersion = "1";

nlohmann::json to_json(const SensorFrame& frame);
SensorFrame sensor_frame_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ActionOutcome& outcome);
ActionOutcome action_outcome_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TaskDef& task);
nlohmann::json to_json(const RobotDef& robot);

/// Environment metadata with the ground-truth `objects` list left out.
nlohmann::json public_environment(const EnvironmentDef& env);

/// Everything a client may know about the session.
nlohmann::json public_config(const ResolvedConfig& config);

nlohmann::json ok(nlohmann::json payload);
nlohmann::json error(std::string_view code, const std::string& message);

/// HTTP status for a failure code.
int http_status(ErrorCode code);

/// Inverse of to_string(ErrorCode); Internal for unknown strings.
ErrorCode error_code_from(std::string_view code);

}  // namespace taskbench::wire
