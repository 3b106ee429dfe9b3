#include "taskbench/client.hpp"

#include <httplib.h>

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <thread>

#include "taskbench/error.hpp"
#include "taskbench/wire.hpp"

extern char** environ;

namespace taskbench {

using nlohmann::json;

Address parse_address(std::string_view text) {
  std::string s(text);
  if (auto p = s.find("://"); p != std::string::npos) s = s.substr(p + 3);
  while (!s.empty() && s.back() == '/') s.pop_back();
  Address a;
  const auto colon = s.rfind(':');
  std::string port_text = s;
  if (colon != std::string::npos) {
    a.host = s.substr(0, colon);
    port_text = s.substr(colon + 1);
  }
  if (a.host.empty()) a.host = kDefaultHost;
  try {
    std::size_t used = 0;
    a.port = std::stoi(port_text, &used);
    if (used != port_text.size() || a.port <= 0 || a.port > 65535) throw std::out_of_range("");
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "invalid supervisor address '" + std::string(text) + "'");
  }
  return a;
}

Address default_address() {
  if (const char* env = std::getenv(kAddrEnv); env && *env) return parse_address(env);
  return {};
}

namespace {

httplib::Client make_client(const Address& addr) {
  httplib::Client cli(addr.host, addr.port);
  cli.set_connection_timeout(std::chrono::seconds(2));
  cli.set_read_timeout(std::chrono::seconds(30));
  cli.set_write_timeout(std::chrono::seconds(5));
  return cli;
}

}  // namespace

json ClientHandle::request(const std::string& method, const std::string& path,
                           const json* body) const {
  auto cli = make_client(addr_);
  httplib::Result res = method == "POST"
                            ? cli.Post(path, body ? body->dump() : std::string(), "application/json")
                            : cli.Get(path);
  if (!res) {
    throw Error(ErrorCode::ConnectionError, "cannot reach supervisor at " + addr_.str() + ": " +
                                                httplib::to_string(res.error()));
  }
  const json envelope = json::parse(res->body, nullptr, false);
  if (envelope.is_discarded() || !envelope.is_object()) {
    throw Error(ErrorCode::Internal, "non-JSON reply from " + path);
  }
  if (res->status != 200 || envelope.contains("error")) {
    const json& err = envelope.value("error", json::object());
    const std::string code = err.value("code", "Internal");
    const std::string message = err.value("message", "HTTP " + std::to_string(res->status));
    ErrorCode ec = wire::error_code_from(code);
    if (ec == ErrorCode::Internal && res->status == 404) ec = ErrorCode::NotFound;
    throw Error(ec, message);
  }
  if (!envelope.contains("result")) throw Error(ErrorCode::Internal, "reply without result");
  return envelope.at("result");
}

ClientHandle ClientHandle::connect(const Address& addr) {
  ClientHandle h;
  h.addr_ = addr;
  json health;
  try {
    health = h.request("GET", "/status/health");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConnectionError) throw;
    throw Error(ErrorCode::SupervisorUnhealthy, e.what());
  }
  if (health != "ok") {
    throw Error(ErrorCode::SupervisorUnhealthy, "supervisor health is " + health.dump());
  }
  h.config_ = h.request("GET", "/config");
  const json conns = h.request("GET", "/connections");
  h.sensors_ = conns.at("sensors").get<std::vector<std::string>>();
  h.actuators_ = conns.at("actuators").get<std::vector<std::string>>();
  h.task_name_ = h.config_.at("task").at("name").get<std::string>();
  return h;
}

int ClientHandle::scene_count() const { return config_.at("scene_count").get<int>(); }

std::map<std::string, SensorFrame> ClientHandle::observe() const {
  std::map<std::string, SensorFrame> frames;
  for (const auto& name : sensors_) {
    try {
      frames.emplace(name, wire::sensor_frame_from_json(request("GET", "/sense/" + name)));
    } catch (const Error& e) {
      throw Error(ErrorCode::ObservationError,
                  "sensor '" + name + "' failed: " + std::string(e.what()));
    }
  }
  return frames;
}

ActionOutcome ClientHandle::act(const std::string& name, std::optional<double> value) const {
  if (std::find(actuators_.begin(), actuators_.end(), name) == actuators_.end()) {
    throw Error(ErrorCode::InvalidArgument, "'" + name + "' is not a declared actuator");
  }
  const json body = value ? json{{"value", *value}} : json::object();
  return wire::action_outcome_from_json(request("POST", "/act/" + name, &body));
}

void ClientHandle::reset() const { request("POST", "/robot/reset"); }

int ClientHandle::next_scene() const { return request("POST", "/robot/next_scene").get<int>(); }

bool ClientHandle::is_collided() const { return request("GET", "/robot/is_collided").get<bool>(); }

bool ClientHandle::is_finished() const { return request("GET", "/robot/is_finished").get<bool>(); }

ResultsFile ClientHandle::prefilled_results() const {
  std::vector<EnvironmentRef> envs;
  std::vector<std::string> class_list;
  for (const auto& e : config_.at("environments")) {
    envs.push_back({e.at("name").get<std::string>(), e.at("variant").get<int>()});
  }
  if (!config_.at("environments").empty()) {
    class_list = config_.at("environments").front().at("class_list").get<std::vector<std::string>>();
  }
  const json& task = config_.at("task");
  return taskbench::prefilled_results(task.at("name").get<std::string>(),
                                      task.at("results_format").get<std::string>(), envs,
                                      class_list);
}

// ---- agent runner --------------------------------------------------------------

namespace {

template <typename F>
auto agent_call(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::AgentError) throw;
    throw Error(ErrorCode::AgentError, std::string("agent ") + what + " failed: " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::AgentError, std::string("agent ") + what + " failed: " + e.what());
  }
}

}  // namespace

RunStats run_agent(const ClientHandle& handle, Agent& agent,
                   const std::filesystem::path& results_path) {
  RunStats stats;
  const int scenes = handle.scene_count();
  const bool passive = handle.task().control_mode == ControlMode::passive;
  int scene = 0;
  std::optional<ActionOutcome> last;

  auto advance_scene = [&] {
    handle.next_scene();
    ++scene;
    ++stats.scenes;
    last.reset();
  };

  for (;;) {
    Observations obs{scene, handle.observe()};
    ++stats.observes;
    if (agent_call("is_done", [&] { return agent.is_done(last); })) break;
    AgentAction action =
        agent_call("pick_action", [&] { return agent.pick_action(obs, handle.actuators()); });
    ++stats.picks;

    if (action.name == kNextSceneAction) {
      if (scene + 1 >= scenes) {
        throw Error(ErrorCode::AgentError, "agent asked for a next scene but none is left");
      }
      advance_scene();
      continue;
    }
    const auto& acts = handle.actuators();
    if (std::find(acts.begin(), acts.end(), action.name) == acts.end()) {
      throw Error(ErrorCode::AgentError,
                  "agent picked undeclared action '" + action.name + "'");
    }
    last = handle.act(action.name, action.value);
    ++stats.acts;
    if (passive && last->status == ActionStatus::finished_trajectory && scene + 1 < scenes) {
      advance_scene();
    }
  }

  const ResultsFile prefill = handle.prefilled_results();
  agent_call("save_result", [&] { agent.save_result(results_path, prefill); });
  if (!std::filesystem::exists(results_path)) {
    throw Error(ErrorCode::ResultValidationError,
                "agent did not write " + results_path.string());
  }
  const ResultsFile saved = read_results(results_path);
  if (saved.task_name != prefill.task_name ||
      saved.environment_details != prefill.environment_details ||
      saved.class_list != prefill.class_list || saved.results_format != prefill.results_format) {
    throw Error(ErrorCode::ResultValidationError,
                results_path.string() + ": task, environment or class metadata was altered");
  }
  return stats;
}

// ---- submission runner ---------------------------------------------------------

namespace {

std::string substitute(std::string text, const std::string& key, const std::string& value) {
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

std::vector<std::string> child_environment(const std::map<std::string, std::string>& overrides) {
  std::vector<std::string> env;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq != std::string::npos && overrides.count(entry.substr(0, eq))) continue;
    env.push_back(entry);
  }
  for (const auto& [k, v] : overrides) env.push_back(k + "=" + v);
  return env;
}

}  // namespace

ResultsFile run_submission(const std::string& command, const Address& addr,
                           const std::filesystem::path& results_path,
                           const SubmissionOptions& options) {
  const std::string results = std::filesystem::absolute(results_path).string();
  std::string cmd = substitute(command, "{addr}", addr.str());
  cmd = substitute(cmd, "{results}", results);

  std::map<std::string, std::string> overrides = options.env;
  overrides[kAddrEnv] = addr.str();
  overrides[kResultsEnv] = results;
  std::vector<std::string> env_strings = child_environment(overrides);
  std::vector<char*> envp;
  for (auto& s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);

  std::string sh = "/bin/sh", dash_c = "-c";
  std::vector<char*> argv = {sh.data(), dash_c.data(), cmd.data(), nullptr};

  // Stale output from an earlier run must not pass for this one.
  std::error_code ec;
  std::filesystem::remove(results_path, ec);

  pid_t pid = 0;
  if (int rc = ::posix_spawn(&pid, sh.c_str(), nullptr, nullptr, argv.data(), envp.data());
      rc != 0) {
    throw Error(ErrorCode::SubmissionFailed,
                "cannot launch submission: " + std::string(std::strerror(rc)));
  }

  const auto deadline = std::chrono::steady_clock::now() + options.timeout;
  int status = 0;
  bool timed_out = false;
  for (;;) {
    const pid_t r = ::waitpid(pid, &status, options.timeout.count() > 0 ? WNOHANG : 0);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) {
      throw Error(ErrorCode::SubmissionFailed, "waitpid failed: " + std::string(std::strerror(errno)));
    }
    if (r == 0) {
      if (std::chrono::steady_clock::now() >= deadline) {
        ::kill(pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        timed_out = true;
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }
  if (timed_out) throw SubmissionFailed(kTimeoutExitCode);
  if (WIFSIGNALED(status)) throw SubmissionFailed(128 + WTERMSIG(status));
  if (WIFEXITED(status) && WEXITSTATUS(status) != 0) throw SubmissionFailed(WEXITSTATUS(status));

  if (!std::filesystem::exists(results_path)) {
    throw Error(ErrorCode::ResultValidationError,
                "submission exited cleanly but wrote no results to " + results);
  }
  return read_results(results_path);
}

}  // namespace taskbench
