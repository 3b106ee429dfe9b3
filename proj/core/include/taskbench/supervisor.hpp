#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>

#include <nlohmann/json.hpp>

#include "taskbench/config_pool.hpp"
#include "taskbench/world_sim.hpp"

namespace taskbench {

struct SupervisorOptions {
  /// Simulated actuation time; an act holds the session for this long.
  std::chrono::milliseconds act_latency{0};
};

struct Reply {
  int status = 200;
  nlohmann::json body;  // always a wire envelope
};

/// The session owner. Routes client requests to the simulated robot and
/// serves the configuration with ground truth stripped.
///
/// Endpoints:
///   GET  /status/health          GET  /config[/<key>]      GET /connections
///   GET  /sense/<name>           POST /act/<name>
///   POST /robot/reset            POST /robot/next_scene
///   GET  /robot/is_collided      GET  /robot/is_finished
///
/// State-mutating requests (act, reset, next_scene) never overlap: one that
/// arrives while another is running gets 409 Busy. Sensor reads wait.
class Supervisor {
 public:
  explicit Supervisor(ResolvedConfig config, SupervisorOptions options = {});
  ~Supervisor();

  Supervisor(const Supervisor&) = delete;
  Supervisor& operator=(const Supervisor&) = delete;

  /// Transport-independent request handler; the HTTP layer is a thin shim
  /// over this.
  Reply handle(std::string_view method, std::string_view path, std::string_view body);

  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Throws Error(AddrInUse) when the address cannot be bound.
  void start(const std::string& host, int port);
  void stop();
  /// Blocks until stop() has run on another thread; returns at once if the
  /// server is not running.
  void wait();

  int port() const { return port_; }
  bool running() const;
  const ResolvedConfig& config() const { return config_; }
  int scene_index() const;

 private:
  Reply route(std::string_view method, std::string_view path, std::string_view body);
  Reply get_config(std::string_view key) const;
  Reply get_connections() const;
  Reply get_sense(const std::string& name);
  Reply post_act(const std::string& name, std::string_view body);
  Reply robot_control(std::string_view verb, std::string_view method);

  ResolvedConfig config_;
  SupervisorOptions options_;
  nlohmann::json public_config_;
  std::chrono::system_clock::time_point started_at_;

  mutable std::mutex world_mutex_;
  WorldState world_;
  int scene_index_ = 0;
  std::atomic<bool> action_in_flight_{false};

  struct Http;
  mutable std::mutex life_mutex_;
  std::condition_variable stopped_;
  std::unique_ptr<Http> http_;
  std::thread server_thread_;
  int port_ = 0;
};

}  // namespace taskbench
