#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "taskbench/config_pool.hpp"
#include "taskbench/results.hpp"
#include "taskbench/world_sim.hpp"

namespace taskbench {

inline constexpr const char* kAddrEnv = "TASKBENCH_ADDR";
inline constexpr const char* kResultsEnv = "TASKBENCH_RESULTS";
inline constexpr const char* kDefaultHost = "127.0.0.1";
inline constexpr int kDefaultPort = 10000;

struct Address {
  std::string host = kDefaultHost;
  int port = kDefaultPort;

  std::string str() const { return host + ":" + std::to_string(port); }
};

/// Accepts `host:port`, `http://host:port` or a bare port.
Address parse_address(std::string_view text);

/// TASKBENCH_ADDR when set, otherwise 127.0.0.1:10000.
Address default_address();

/// A connection to a live supervisor with the session's configuration
/// cached. Holds no other state, so two handles see the same session.
class ClientHandle {
 public:
  /// Throws ConnectionError when nothing answers, SupervisorUnhealthy when
  /// the health check fails.
  static ClientHandle connect(const Address& addr);

  const Address& address() const { return addr_; }
  /// The configuration as served by GET /config.
  const nlohmann::json& config() const { return config_; }
  const std::vector<std::string>& sensors() const { return sensors_; }
  const std::vector<std::string>& actuators() const { return actuators_; }
  const std::string& task_name() const { return task_name_; }
  TaskName task() const { return parse_task_name(task_name_); }
  int scene_count() const;

  /// Reads every declared sensor in declared order. Throws ObservationError
  /// naming the first sensor that fails.
  std::map<std::string, SensorFrame> observe() const;

  /// Undeclared names fail locally (InvalidArgument). Supervisor refusals
  /// come back as ModeViolation / BadRequest / Busy / SessionFinished.
  ActionOutcome act(const std::string& name, std::optional<double> value = std::nullopt) const;

  void reset() const;
  /// Returns the new scene index.
  int next_scene() const;
  bool is_collided() const;
  bool is_finished() const;

  /// Empty object map carrying the session's task, environments and class
  /// list.
  ResultsFile prefilled_results() const;

  /// Raw request returning the unwrapped `result` payload.
  nlohmann::json request(const std::string& method, const std::string& path,
                         const nlohmann::json* body = nullptr) const;

 private:
  Address addr_;
  nlohmann::json config_;
  std::vector<std::string> sensors_;
  std::vector<std::string> actuators_;
  std::string task_name_;
};

inline ClientHandle connect(const Address& addr) { return ClientHandle::connect(addr); }

struct Observations {
  int scene_index = 0;
  std::map<std::string, SensorFrame> frames;
};

struct AgentAction {
  std::string name;
  std::optional<double> value;
};

/// Returned from pick_action to move an active scene change detection run
/// on to its second scene.
inline constexpr const char* kNextSceneAction = "next_scene";

/// The three things a solution provides.
class Agent {
 public:
  virtual ~Agent() = default;

  /// `last` is empty before the first action of each scene.
  virtual bool is_done(const std::optional<ActionOutcome>& last) = 0;
  virtual AgentAction pick_action(const Observations& observations,
                                  const std::vector<std::string>& actuators) = 0;
  /// Receives the runner's prefilled results and must write them to `path`.
  virtual void save_result(const std::filesystem::path& path, ResultsFile results) = 0;
};

struct RunStats {
  int observes = 0;
  int picks = 0;
  int acts = 0;
  int scenes = 1;
};

/// Runs the observe / is_done / pick_action / act loop until the agent is
/// done, advancing scene change detection runs to the second scene when the
/// first trajectory finishes (passive) or the agent asks (active), then has
/// the agent save its results and validates the written file.
///
/// Throws AgentError when agent code throws or misbehaves and
/// ResultValidationError when the saved file is missing or invalid.
RunStats run_agent(const ClientHandle& handle, Agent& agent,
                   const std::filesystem::path& results_path);

struct SubmissionOptions {
  /// Kill the child after this long; 0 means no limit.
  std::chrono::seconds timeout{0};
  /// Extra environment for the child, on top of TASKBENCH_ADDR/RESULTS.
  std::map<std::string, std::string> env;
};

/// Exit status used when a submission is killed for running too long.
inline constexpr int kTimeoutExitCode = 124;

/// Runs `command` through /bin/sh with TASKBENCH_ADDR and TASKBENCH_RESULTS
/// set; `{addr}` and `{results}` in the command are substituted too. On a
/// zero exit the results file is validated and returned.
///
/// Throws SubmissionFailed carrying the child's exit code (128 + signal
/// for signals) and ResultValidationError.
ResultsFile run_submission(const std::string& command, const Address& addr,
                           const std::filesystem::path& results_path,
                           const SubmissionOptions& options = {});

}  // namespace taskbench
