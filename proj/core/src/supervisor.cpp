#include "taskbench/supervisor.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>

#include "taskbench/error.hpp"
#include "taskbench/wire.hpp"

namespace taskbench {

using nlohmann::json;

struct Supervisor::Http {
  httplib::Server server;
};

namespace {

Reply fail(ErrorCode code, const std::string& message) {
  return {wire::http_status(code), wire::error(to_string(code), message)};
}

Reply method_not_allowed(std::string_view method, std::string_view path) {
  return {405, wire::error("MethodNotAllowed",
                           std::string(method) + " is not supported on " + std::string(path))};
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

// Splits "/a/b/c" into {"a","b","c"}; query strings are ignored.
std::vector<std::string> path_segments(std::string_view path) {
  if (auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    const std::size_t j = path.find('/', i);
    const std::size_t end = j == std::string_view::npos ? path.size() : j;
    if (end > i) out.emplace_back(path.substr(i, end - i));
    i = end;
  }
  return out;
}

// Claims the single mutation slot; a second claimant gets owned() == false.
class MutationSlot {
 public:
  explicit MutationSlot(std::atomic<bool>& flag) : flag_(flag) {
    bool expected = false;
    owned_ = flag_.compare_exchange_strong(expected, true);
  }
  ~MutationSlot() {
    if (owned_) flag_ = false;
  }
  bool owned() const { return owned_; }

 private:
  std::atomic<bool>& flag_;
  bool owned_ = false;
};

}  // namespace

Supervisor::Supervisor(ResolvedConfig config, SupervisorOptions options)
    : config_(std::move(config)),
      options_(options),
      public_config_(wire::public_config(config_)),
      started_at_(std::chrono::system_clock::now()) {
  if (config_.environments.empty()) {
    throw Error(ErrorCode::InvalidArgument, "configuration has no environment");
  }
  for (const auto& env : config_.environments) {
    if (env.kind != PlatformKind::sim) {
      throw Error(ErrorCode::NotSupported,
                  "environment '" + env.id() + "' is not simulated; no backend available");
    }
  }
  world_ = init_world(config_.environments.front(), config_.robot, config_.seed,
                      config_.task.localisation);
}

Supervisor::~Supervisor() { stop(); }

int Supervisor::scene_index() const {
  std::lock_guard lock(world_mutex_);
  return scene_index_;
}

Reply Supervisor::handle(std::string_view method, std::string_view path, std::string_view body) {
  try {
    return route(method, path, body);
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail(ErrorCode::Internal, e.what());
  }
}

Reply Supervisor::route(std::string_view method, std::string_view path, std::string_view body) {
  const auto seg = path_segments(path);
  const bool get = method == "GET";
  const bool post = method == "POST";
  auto not_found = [&] { return fail(ErrorCode::NotFound, "no route " + std::string(path)); };
  if (seg.empty()) return not_found();

  const std::string& head = seg[0];
  if (head == "status" && seg.size() == 2 && seg[1] == "health") {
    if (!get) return method_not_allowed(method, path);
    return {200, wire::ok("ok")};
  }
  if (head == "config" && seg.size() <= 2) {
    if (!get) return method_not_allowed(method, path);
    return get_config(seg.size() == 2 ? std::string_view(seg[1]) : std::string_view());
  }
  if (head == "connections" && seg.size() == 1) {
    if (!get) return method_not_allowed(method, path);
    return get_connections();
  }
  if (head == "sense" && seg.size() == 2) {
    if (!get) return method_not_allowed(method, path);
    return get_sense(seg[1]);
  }
  if (head == "act" && seg.size() == 2) {
    if (!post) return method_not_allowed(method, path);
    return post_act(seg[1], body);
  }
  if (head == "robot" && seg.size() == 2) {
    return robot_control(seg[1], method);
  }
  return not_found();
}

Reply Supervisor::get_config(std::string_view key) const {
  if (key.empty()) return {200, wire::ok(public_config_)};
  auto it = public_config_.find(std::string(key));
  if (it == public_config_.end()) {
    return fail(ErrorCode::NotFound, "no configuration field '" + std::string(key) + "'");
  }
  return {200, wire::ok(*it)};
}

Reply Supervisor::get_connections() const {
  return {200, wire::ok({{"sensors", config_.task.observations},
                         {"actuators", config_.task.actions}})};
}

Reply Supervisor::get_sense(const std::string& name) {
  if (!contains(config_.task.observations, name)) {
    if (contains(config_.task.actions, name) || motion_kind_from(name)) {
      return fail(ErrorCode::WrongChannel, "'" + name + "' is an actuator, not a sensor");
    }
    return fail(ErrorCode::NotFound, "no sensor '" + name + "' in this task");
  }
  std::lock_guard lock(world_mutex_);
  return {200, wire::ok(wire::to_json(sense(world_, name)))};
}

Reply Supervisor::post_act(const std::string& name, std::string_view body) {
  if (!contains(config_.task.actions, name)) {
    if (contains(config_.task.observations, name)) {
      return fail(ErrorCode::WrongChannel, "'" + name + "' is a sensor, not an actuator");
    }
    if (motion_kind_from(name)) {
      return fail(ErrorCode::ModeViolation,
                  "'" + name + "' is not available in " +
                      std::string(to_string(config_.task.control_mode)) + " mode");
    }
    return fail(ErrorCode::NotFound, "no actuator '" + name + "' in this task");
  }
  const auto& conn = config_.robot.connections.at(name);
  const auto kind = motion_kind_from(conn.backend_topic);
  if (!kind) {
    return fail(ErrorCode::NotFound, "simulator has no actuator topic '" + conn.backend_topic + "'");
  }

  MotionCommand cmd{*kind, std::nullopt};
  if (!body.empty()) {
    const json args = json::parse(body, nullptr, false);
    if (args.is_discarded() || !args.is_object()) {
      return fail(ErrorCode::BadRequest, "act body must be a JSON object");
    }
    if (auto it = args.find("value"); it != args.end() && !it->is_null()) {
      if (!it->is_number()) return fail(ErrorCode::BadRequest, "'value' must be a number");
      cmd.value = it->get<double>();
    }
  }

  MutationSlot slot(action_in_flight_);
  if (!slot.owned()) return fail(ErrorCode::Busy, "another action is in progress");
  std::lock_guard lock(world_mutex_);
  if (world_.finished) return fail(ErrorCode::SessionFinished, "the trajectory is finished");
  const ActionOutcome outcome = step_motion(world_, cmd, config_.task.control_mode);
  if (options_.act_latency.count() > 0) std::this_thread::sleep_for(options_.act_latency);
  return {200, wire::ok(wire::to_json(outcome))};
}

Reply Supervisor::robot_control(std::string_view verb, std::string_view method) {
  const bool get = method == "GET";
  const bool post = method == "POST";
  const std::string path = "/robot/" + std::string(verb);
  if (verb == "is_collided" || verb == "is_finished") {
    if (!get) return method_not_allowed(method, path);
    std::lock_guard lock(world_mutex_);
    return {200, wire::ok(verb == "is_collided" ? world_.collided : world_.finished)};
  }
  if (verb != "reset" && verb != "next_scene") {
    return fail(ErrorCode::NotFound, "no route " + path);
  }
  if (!post) return method_not_allowed(method, path);

  MutationSlot slot(action_in_flight_);
  if (!slot.owned()) return fail(ErrorCode::Busy, "another action is in progress");
  std::lock_guard lock(world_mutex_);
  if (verb == "reset") {
    reset(world_);
    return {200, wire::ok(true)};
  }
  if (config_.task.scene_count == 1) {
    return fail(ErrorCode::NotSupported, "task '" + config_.task.name + "' has a single scene");
  }
  if (scene_index_ + 1 >= config_.task.scene_count) {
    return fail(ErrorCode::NoMoreScenes, "already on the last scene");
  }
  apply_variant(world_, config_.environments[static_cast<std::size_t>(scene_index_ + 1)]);
  ++scene_index_;
  return {200, wire::ok(scene_index_)};
}

// ---- HTTP transport ----------------------------------------------------------

void Supervisor::start(const std::string& host, int port) {
  std::lock_guard life(life_mutex_);
  if (http_) throw Error(ErrorCode::InvalidArgument, "supervisor already started");
  http_ = std::make_unique<Http>();
  auto& srv = http_->server;
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    Reply reply = handle(req.method, req.path, req.body);
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json");
  };
  const std::string any = R"(/.*)";
  srv.Get(any, dispatch);
  srv.Post(any, dispatch);
  srv.Put(any, dispatch);
  srv.Delete(any, dispatch);
  srv.Patch(any, dispatch);
  srv.Options(any, dispatch);
  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                               std::exception_ptr) {
    res.status = 500;
    res.set_content(wire::error("Internal", "unhandled exception").dump(), "application/json");
  });
  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    res.set_content(wire::error("BadRequest", "HTTP " + std::to_string(res.status)).dump(),
                    "application/json");
  });

  // httplib's default enables SO_REUSEPORT, which would let a second
  // supervisor share the port silently.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  bool bound = false;
  if (port == 0) {
    const int p = srv.bind_to_any_port(host);
    bound = p > 0;
    port_ = p;
  } else {
    bound = srv.bind_to_port(host, port);
    port_ = port;
  }
  if (!bound) {
    http_.reset();
    port_ = 0;
    throw Error(ErrorCode::AddrInUse,
                "cannot bind " + host + ":" + std::to_string(port) + " (address in use?)");
  }
  server_thread_ = std::thread([this] { http_->server.listen_after_bind(); });
  http_->server.wait_until_ready();
}

void Supervisor::stop() {
  std::lock_guard life(life_mutex_);
  if (!http_) return;
  http_->server.stop();
  if (server_thread_.joinable()) server_thread_.join();
  http_.reset();
  stopped_.notify_all();
}

void Supervisor::wait() {
  std::unique_lock life(life_mutex_);
  stopped_.wait(life, [this] { return !http_; });
}

bool Supervisor::running() const {
  std::lock_guard life(life_mutex_);
  return http_ && http_->server.is_running();
}

}  // namespace taskbench
