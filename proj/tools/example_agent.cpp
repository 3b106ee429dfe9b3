// Bundled reference solution. Builds an object map from object glimpses:
// in passive tasks it follows the trajectory, in active tasks it turns on the
// spot. Scene change detection maps are the difference between the two
// scenes' maps.
//
//   taskbench_example_agent [--mode glimpse|done] [--state-confidence P]
//                           [--crash-on ENV_ID]
//
// Reads TASKBENCH_ADDR and TASKBENCH_RESULTS.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "taskbench/client.hpp"
#include "taskbench/error.hpp"
#include "taskbench/results.hpp"

namespace {

using namespace taskbench;

struct MappedObject {
  std::string class_name;
  Vec3 centroid{};
  Vec3 extent{};
  int sightings = 0;
};

constexpr double kMergeDistance = 0.25;

double distance3(const Vec3& a, const Vec3& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}

class ObjectMap {
 public:
  void add(const Glimpse& g) {
    for (auto& o : objects_) {
      if (o.class_name == g.class_name && distance3(o.centroid, g.centroid) < kMergeDistance) {
        ++o.sightings;
        // Running mean; exact when every sighting agrees.
        for (int k = 0; k < 3; ++k) {
          o.centroid[k] += (g.centroid[k] - o.centroid[k]) / o.sightings;
          o.extent[k] += (g.extent[k] - o.extent[k]) / o.sightings;
        }
        return;
      }
    }
    objects_.push_back({g.class_name, g.centroid, g.extent, 1});
  }

  bool has_near(const MappedObject& other) const {
    return std::any_of(objects_.begin(), objects_.end(), [&](const MappedObject& o) {
      return o.class_name == other.class_name &&
             distance3(o.centroid, other.centroid) < kMergeDistance;
    });
  }

  const std::vector<MappedObject>& objects() const { return objects_; }

 private:
  std::vector<MappedObject> objects_;
};

class GlimpseAgent : public Agent {
 public:
  GlimpseAgent(bool passive, int scene_count, double state_confidence)
      : passive_(passive), scene_count_(scene_count), state_confidence_(state_confidence),
        maps_(static_cast<std::size_t>(scene_count)) {}

  bool is_done(const std::optional<ActionOutcome>& last) override {
    if (passive_) return last && last->status == ActionStatus::finished_trajectory;
    return scene_ == scene_count_ - 1 && turns_ >= kTurnsPerScene;
  }

  AgentAction pick_action(const Observations& obs, const std::vector<std::string>&) override {
    if (obs.scene_index != scene_) {
      scene_ = obs.scene_index;
      turns_ = 0;
    }
    if (auto it = obs.frames.find("object_glimpse"); it != obs.frames.end()) {
      for (const auto& g : it->second.glimpses) maps_[static_cast<std::size_t>(scene_)].add(g);
    }
    if (passive_) return {"move_next", std::nullopt};
    if (turns_ >= kTurnsPerScene) return {kNextSceneAction, std::nullopt};
    ++turns_;
    return {"rotate_angle", 2.0 * std::numbers::pi / kTurnsPerScene};
  }

  void save_result(const std::filesystem::path& path, ResultsFile results) override {
    auto proposal = [&](const MappedObject& o) -> std::optional<ObjectProposal> {
      auto cls = std::find(results.class_list.begin(), results.class_list.end(), o.class_name);
      if (cls == results.class_list.end()) return std::nullopt;
      ObjectProposal p;
      p.label_probs.assign(results.class_list.size(), 0.0);
      p.label_probs[static_cast<std::size_t>(cls - results.class_list.begin())] = 1.0;
      p.centroid = o.centroid;
      p.extent = o.extent;
      return p;
    };
    auto with_state = [&](ObjectProposal p, ObjectState state) {
      StateProbs s;
      (state == ObjectState::added ? s.added : s.removed) = state_confidence_;
      s.constant = 1.0 - state_confidence_;
      p.state_probs = s;
      return p;
    };

    if (scene_count_ == 1) {
      for (const auto& o : maps_[0].objects()) {
        if (auto p = proposal(o)) results.objects.push_back(std::move(*p));
      }
    } else {
      for (const auto& o : maps_[0].objects()) {
        if (maps_[1].has_near(o)) continue;
        if (auto p = proposal(o)) results.objects.push_back(with_state(*p, ObjectState::removed));
      }
      for (const auto& o : maps_[1].objects()) {
        if (maps_[0].has_near(o)) continue;
        if (auto p = proposal(o)) results.objects.push_back(with_state(*p, ObjectState::added));
      }
    }
    write_results_atomic(path, results);
  }

 private:
  static constexpr int kTurnsPerScene = 8;

  bool passive_;
  int scene_count_;
  double state_confidence_;
  std::vector<ObjectMap> maps_;
  int scene_ = 0;
  int turns_ = 0;
};

// Reports nothing.
class DoneAgent : public Agent {
 public:
  bool is_done(const std::optional<ActionOutcome>&) override { return true; }
  AgentAction pick_action(const Observations&, const std::vector<std::string>& actuators) override {
    return {actuators.front(), std::nullopt};
  }
  void save_result(const std::filesystem::path& path, ResultsFile results) override {
    write_results_atomic(path, results);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Example object-mapping solution"};
  std::string mode = "glimpse";
  double state_confidence = 1.0;
  std::string crash_on;
  std::string addr_text;
  std::string results_text;
  app.add_option("--mode", mode, "glimpse or done")->check(CLI::IsMember({"glimpse", "done"}));
  app.add_option("--state-confidence", state_confidence,
                 "Probability put on the detected change state")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--crash-on", crash_on, "Exit with status 3 when the first scene is this env id");
  app.add_option("--addr", addr_text, "Supervisor address (default: $TASKBENCH_ADDR)");
  app.add_option("--results", results_text, "Results path (default: $TASKBENCH_RESULTS)");
  CLI11_PARSE(app, argc, argv);

  try {
    const Address addr = addr_text.empty() ? default_address() : parse_address(addr_text);
    if (results_text.empty()) {
      const char* env = std::getenv(kResultsEnv);
      results_text = env ? env : "results.json";
    }
    const ClientHandle handle = ClientHandle::connect(addr);

    const auto& first_env = handle.config().at("environments").at(0);
    const std::string env_id = first_env.at("name").get<std::string>() + ":" +
                               std::to_string(first_env.at("variant").get<int>());
    if (!crash_on.empty() && env_id == crash_on) {
      std::cerr << "example agent: crashing on " << env_id << " as requested\n";
      return 3;
    }

    if (mode == "done") {
      DoneAgent agent;
      run_agent(handle, agent, results_text);
    } else {
      GlimpseAgent agent(handle.task().control_mode == ControlMode::passive, handle.scene_count(),
                         state_confidence);
      run_agent(handle, agent, results_text);
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "example agent: " << to_string(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrorCode::ConnectionError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "example agent: " << e.what() << "\n";
    return 1;
  }
}
