#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "taskbench/config_pool.hpp"
#include "taskbench/error.hpp"
#include "test_support.hpp"

using namespace taskbench;
using tbtest::TempDir;
using tbtest::write_file;
namespace fs = std::filesystem;

namespace {

const char* kTaskYaml = R"(name: semantic_slam:active:ground_truth
actions: [move_distance, rotate_angle]
observations: [pose, laser]
results_format: object_map
eval_method: omq
scene_count: 1
)";

const char* kScdTaskYaml = R"(name: scd:passive:ground_truth
actions: [move_next]
observations: [pose, object_glimpse]
results_format: object_map
eval_method: omq
scene_count: 2
)";

const char* kRobotYaml = R"(name: carter
kind: sim
radius: 0.25
glimpse_sigma: 0.05
connections:
  pose: {channel: sensor, backend_topic: pose}
  laser: {channel: sensor, backend_topic: laser}
  object_glimpse: {channel: sensor, backend_topic: object_glimpse}
  move_distance: {channel: actuator, backend_topic: move_distance}
  rotate_angle: {channel: actuator, backend_topic: rotate_angle}
  move_next: {channel: actuator, backend_topic: move_next}
)";

std::string env_yaml(const std::string& name, int variant, const std::string& kind = "sim",
                     const std::string& start = "[1, 1, 0]") {
  return "name: " + name + "\nvariant: " + std::to_string(variant) + "\nkind: " + kind +
         R"(
bounds: [0, 0, 4, 3]
walls:
  - [[0, 0], [4, 0]]
  - [[4, 0], [4, 3]]
start_pose: )" + start + R"(
trajectory:
  - [2, 1, 0]
  - [2, 2, 1.5]
class_list: [chair, table]
objects:
  - {class: chair, centroid: [3, 2, 0.4], extent: [0.5, 0.5, 0.8]}
)";
}

const char* kEvalYaml = R"(name: omq
metric: omq-v1
task_types: [semantic_slam, scd]
)";

void make_pool(const fs::path& root) {
  write_file(root / "tasks/slam.yaml", kTaskYaml);
  write_file(root / "tasks/scd.yaml", kScdTaskYaml);
  write_file(root / "robots/carter.yaml", kRobotYaml);
  write_file(root / "environments/house_1.yaml", env_yaml("house", 1));
  write_file(root / "environments/house_2.yaml", env_yaml("house", 2));
  write_file(root / "environments/office_1.yaml", env_yaml("office", 1));
  write_file(root / "eval_methods/omq.yaml", kEvalYaml);
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::Internal;
}

}  // namespace

TEST(TaskName, ParsesThreeParts) {
  const TaskName n = parse_task_name("scd:passive:noisy");
  EXPECT_EQ(n.type, TaskType::scd);
  EXPECT_EQ(n.control_mode, ControlMode::passive);
  EXPECT_EQ(n.localisation, Localisation::noisy);
  EXPECT_EQ(code_of([] { parse_task_name("scd:passive"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_task_name("slam:active:ground_truth"); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_task_name("scd:active:ground_truth:x"); }),
            ErrorCode::InvalidArgument);
}

TEST(ParseTask, Fields) {
  const TaskDef t = parse_task(kTaskYaml);
  EXPECT_EQ(t.name, "semantic_slam:active:ground_truth");
  EXPECT_EQ(t.type, TaskType::semantic_slam);
  EXPECT_EQ(t.actions, (std::vector<std::string>{"move_distance", "rotate_angle"}));
  EXPECT_EQ(t.observations, (std::vector<std::string>{"pose", "laser"}));
  EXPECT_EQ(t.scene_count, 1);
}

TEST(ParseTask, SceneCountMustMatchType) {
  std::string bad = kScdTaskYaml;
  bad.replace(bad.find("scene_count: 2"), 14, "scene_count: 1");
  EXPECT_THROW(parse_task(bad), ParseError);
}

TEST(ParseTask, PassiveMustUseMoveNext) {
  std::string bad = kScdTaskYaml;
  bad.replace(bad.find("[move_next]"), 11, "[move_distance]");
  EXPECT_THROW(parse_task(bad), ParseError);
}

TEST(ParseRobot, DefaultsAndOverrides) {
  const RobotDef r = parse_robot(kRobotYaml);
  EXPECT_EQ(r.kind, PlatformKind::sim);
  EXPECT_DOUBLE_EQ(r.radius, 0.25);
  EXPECT_DOUBLE_EQ(r.sim.glimpse_sigma, 0.05);
  EXPECT_DOUBLE_EQ(r.sim.substep, 0.01);
  EXPECT_EQ(r.sim.laser_beams, 31);
  EXPECT_EQ(r.connections.at("laser").channel, Channel::sensor);
  EXPECT_EQ(r.connections.at("move_next").channel, Channel::actuator);
}

TEST(ParseEnvironment, MissingStartPoseNamesField) {
  std::string yaml = env_yaml("house", 1);
  const auto at = yaml.find("start_pose");
  yaml.erase(at, yaml.find('\n', at) - at + 1);
  try {
    parse_environment(yaml, "house_1.yaml");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("start_pose"), std::string::npos) << e.what();
    EXPECT_EQ(e.path(), "house_1.yaml");
  }
}

TEST(ParseEnvironment, ObjectClassMustBeListed) {
  std::string yaml = env_yaml("house", 1);
  yaml.replace(yaml.find("class: chair"), 12, "class: piano");
  EXPECT_THROW(parse_environment(yaml), ParseError);
}

TEST(ParseEnvironment, MalformedYamlReportsLine) {
  try {
    parse_environment("name: house\nvariant: [1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_GT(e.line(), 0);
  }
}

TEST(LoadPool, CountsMatchFiles) {
  TempDir dir;
  make_pool(dir.path());
  const Pools p = load_pool(dir.path());
  EXPECT_EQ(p.tasks.size(), 2u);
  EXPECT_EQ(p.robots.size(), 1u);
  EXPECT_EQ(p.environments.size(), 3u);
  EXPECT_EQ(p.eval_methods.size(), 1u);
  EXPECT_TRUE(p.environments.count("house:2"));
}

TEST(LoadPool, IdentifierComesFromNameNotFilename) {
  TempDir dir;
  make_pool(dir.path());
  write_file(dir / "robots/zzz.yaml", kRobotYaml);
  EXPECT_EQ(code_of([&] { load_pool(dir.path()); }), ErrorCode::DuplicateDefinition);
}

TEST(LoadPool, MissingSubdirectory) {
  TempDir dir;
  make_pool(dir.path());
  fs::remove_all(dir / "eval_methods");
  EXPECT_EQ(code_of([&] { load_pool(dir.path()); }), ErrorCode::NotFound);
}

TEST(LoadPool, InvalidFilesReportedNotSkipped) {
  TempDir dir;
  make_pool(dir.path());
  write_file(dir / "robots/broken.yaml", "name: broken\nkind: hovercraft\n");
  EXPECT_THROW(load_pool(dir.path()), ParseError);
  const Pools lenient = load_pool(dir.path(), LoadMode::lenient);
  ASSERT_EQ(lenient.issues.size(), 1u);
  EXPECT_EQ(lenient.issues[0].file.filename(), "broken.yaml");
  EXPECT_EQ(lenient.robots.size(), 1u);
}

TEST(LoadPool, SaveRoundTrip) {
  TempDir a, b;
  make_pool(a.path());
  const Pools first = load_pool(a.path());
  save_pool(first, b.path());
  const Pools second = load_pool(b.path());
  EXPECT_TRUE(first.same_definitions(second));
}

TEST(LoadPool, BundledPoolRoundTrips) {
  TempDir out;
  const Pools first = load_pool(tbtest::kPoolDir);
  save_pool(first, out.path());
  EXPECT_TRUE(first.same_definitions(load_pool(out.path())));
}

TEST(Serialize, SingleDefinitionsRoundTrip) {
  const EnvironmentDef env = parse_environment(env_yaml("house", 1));
  EXPECT_EQ(parse_environment(serialize(env)), env);
  const RobotDef robot = parse_robot(kRobotYaml);
  EXPECT_EQ(parse_robot(serialize(robot)), robot);
  const TaskDef task = parse_task(kScdTaskYaml);
  EXPECT_EQ(parse_task(serialize(task)), task);
  const EvalMethodDef m = parse_eval_method(kEvalYaml);
  EXPECT_EQ(parse_eval_method(serialize(m)), m);
}

TEST(Serialize, AwkwardDoublesSurvive) {
  EnvironmentDef env = parse_environment(env_yaml("house", 1));
  env.start_pose = {0.1 + 0.2, 1.0 / 3.0, -2.718281828459045};
  env.objects[0].extent = {1e-7, 1.2345678901234567, 0.30000000000000004};
  EXPECT_EQ(parse_environment(serialize(env)), env);
}

TEST(ListOptions, SortedAndDeterministic) {
  TempDir dir;
  make_pool(dir.path());
  const Pools p = load_pool(dir.path());
  EXPECT_EQ(list_options(p, PoolKind::environments),
            (std::vector<std::string>{"house:1", "house:2", "office:1"}));
  EXPECT_EQ(list_options(p, PoolKind::robots), std::vector<std::string>{"carter"});
  EXPECT_EQ(list_options(load_pool(dir.path()), PoolKind::tasks), list_options(p, PoolKind::tasks));
  EXPECT_TRUE(list_options(Pools{}, PoolKind::tasks).empty());
}

TEST(ValidateSelection, HappyPath) {
  TempDir dir;
  make_pool(dir.path());
  const Pools p = load_pool(dir.path());
  const ResolvedConfig c =
      validate_selection(p, "semantic_slam:active:ground_truth", "carter", {"house:1"}, 9);
  EXPECT_EQ(c.task.name, "semantic_slam:active:ground_truth");
  ASSERT_EQ(c.environments.size(), 1u);
  EXPECT_EQ(c.environments[0].id(), "house:1");
  EXPECT_EQ(c.eval_method, "omq");
  EXPECT_EQ(c.seed, 9u);
}

TEST(ValidateSelection, Errors) {
  TempDir dir;
  make_pool(dir.path());
  write_file(dir / "robots/real.yaml",
             "name: real\nkind: real\nconnections:\n  pose: {channel: sensor, backend_topic: pose}\n");
  write_file(dir / "robots/blind.yaml",
             "name: blind\nkind: sim\nconnections:\n"
             "  move_distance: {channel: actuator, backend_topic: move_distance}\n"
             "  rotate_angle: {channel: actuator, backend_topic: rotate_angle}\n"
             "  laser: {channel: actuator, backend_topic: move_distance}\n");
  const Pools p = load_pool(dir.path());
  const std::string slam = "semantic_slam:active:ground_truth";
  const std::string scd = "scd:passive:ground_truth";

  EXPECT_EQ(code_of([&] { validate_selection(p, "nope:active:noisy", "carter", {"house:1"}); }),
            ErrorCode::NotFound);
  EXPECT_EQ(code_of([&] { validate_selection(p, slam, "ghost", {"house:1"}); }), ErrorCode::NotFound);
  EXPECT_EQ(code_of([&] { validate_selection(p, slam, "carter", {"house:9"}); }),
            ErrorCode::NotFound);
  EXPECT_EQ(code_of([&] { validate_selection(p, scd, "carter", {"house:1"}); }),
            ErrorCode::SceneCountMismatch);
  EXPECT_EQ(code_of([&] { validate_selection(p, slam, "carter", {"house:1", "house:2"}); }),
            ErrorCode::SceneCountMismatch);
  EXPECT_EQ(code_of([&] { validate_selection(p, scd, "carter", {"house:1", "office:1"}); }),
            ErrorCode::IncompatibleSelection);
  EXPECT_EQ(code_of([&] { validate_selection(p, scd, "carter", {"house:1", "house:1"}); }),
            ErrorCode::IncompatibleSelection);
  // laser is wired as an actuator on this robot.
  EXPECT_EQ(code_of([&] { validate_selection(p, slam, "blind", {"house:1"}); }),
            ErrorCode::CapabilityMissing);

  try {
    validate_selection(p, slam, "real", {"house:1"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IncompatibleSelection);
    EXPECT_NE(std::string(e.what()).find("incompatible"), std::string::npos);
  }
}

TEST(ValidateSelection, ScdVariantsShareClassList) {
  Pools p = load_pool(tbtest::kPoolDir);
  EXPECT_NO_THROW(validate_selection(p, "scd:passive:ground_truth", "sim_bot", {"house:1", "house:2"}));
  p.environments.at("house:2").class_list.push_back("piano");
  try {
    validate_selection(p, "scd:passive:ground_truth", "sim_bot", {"house:1", "house:2"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IncompatibleSelection);
    EXPECT_NE(std::string(e.what()).find("class lists"), std::string::npos);
  }
}

TEST(ValidateSelection, ClearanceUsesRobotRadius) {
  TempDir dir;
  make_pool(dir.path());
  // 0.1 m from the wall along y = 0.
  write_file(dir / "environments/tight.yaml", env_yaml("tight", 1, "sim", "[1, 0.1, 0]"));
  const Pools p = load_pool(dir.path());
  EXPECT_EQ(code_of([&] {
              validate_selection(p, "semantic_slam:active:ground_truth", "carter", {"tight:1"});
            }),
            ErrorCode::InvalidEnvironment);
  const auto v = find_clearance_violation(p.environments.at("tight:1"), 0.2);
  ASSERT_TRUE(v);
  EXPECT_FALSE(find_clearance_violation(p.environments.at("tight:1"), 0.05));
}

TEST(ValidateSelection, BundledPoolCombinations) {
  const Pools p = load_pool(tbtest::kPoolDir);
  EXPECT_TRUE(p.issues.empty());
  for (const auto& task : list_options(p, PoolKind::tasks)) {
    for (const auto& robot : {"sim_bot", "sim_bot_ideal"}) {
      if (parse_task_name(task).type == TaskType::scd) {
        EXPECT_NO_THROW(validate_selection(p, task, robot, {"house:1", "house:2"})) << task;
      } else {
        for (const auto& env : list_options(p, PoolKind::environments)) {
          EXPECT_NO_THROW(validate_selection(p, task, robot, {env})) << task << " " << env;
        }
      }
    }
  }
}

// Random pools, random selections: whatever validate_selection accepts must
// satisfy every configuration invariant, and it only ever fails with the
// documented codes.
TEST(ValidateSelection, PropertyRandomPools) {
  std::mt19937_64 rng(2024);
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  const std::vector<std::string> sensors = {"pose", "laser", "object_glimpse"};
  const std::vector<std::string> motions = {"move_distance", "rotate_angle", "move_next"};
  int accepted = 0;

  for (int round = 0; round < 300; ++round) {
    Pools p;
    for (const char* type : {"semantic_slam", "scd"}) {
      for (const char* mode : {"active", "passive"}) {
        TaskDef t = tbtest::make_task(std::string(type) + ":" + mode + ":ground_truth");
        if (coin(0.3)) t.eval_method = "missing";
        p.tasks[t.name] = t;
      }
    }
    for (int r = 0; r < 3; ++r) {
      RobotDef robot = tbtest::sim_robot(0.1 + 0.3 * coin(0.5));
      robot.name = "r" + std::to_string(r);
      robot.kind = coin(0.2) ? PlatformKind::real : PlatformKind::sim;
      if (coin(0.3)) robot.connections.erase(sensors[static_cast<std::size_t>(pick(3))]);
      if (coin(0.3)) robot.connections.erase(motions[static_cast<std::size_t>(pick(3))]);
      if (coin(0.2)) robot.connections["pose"].channel = Channel::actuator;
      p.robots[robot.name] = robot;
    }
    for (const char* name : {"a", "b"}) {
      for (int v = 1; v <= 2; ++v) {
        EnvironmentDef e = tbtest::open_env({{{-2, -2}, {2, -2}}});
        e.name = name;
        e.variant = v;
        e.kind = coin(0.15) ? PlatformKind::real : PlatformKind::sim;
        e.start_pose = {0, coin(0.2) ? -1.85 : 0.0, 0};
        e.trajectory = {{1, 1, 0}};
        p.environments[e.id()] = e;
      }
    }
    p.eval_methods["omq"] = {"omq", "omq-v1", {TaskType::semantic_slam, TaskType::scd}};

    const auto tasks = list_options(p, PoolKind::tasks);
    const auto envs = list_options(p, PoolKind::environments);
    const std::string task = tasks[static_cast<std::size_t>(pick(static_cast<int>(tasks.size())))];
    const std::string robot = "r" + std::to_string(pick(3));
    std::vector<std::string> chosen;
    const int n = 1 + pick(2);
    for (int i = 0; i < n; ++i) chosen.push_back(envs[static_cast<std::size_t>(pick(4))]);

    try {
      const ResolvedConfig c = validate_selection(p, task, robot, chosen, 5);
      ++accepted;
      ASSERT_EQ(static_cast<int>(c.environments.size()), c.task.scene_count);
      EXPECT_EQ(c.task.scene_count == 2, c.task.type == TaskType::scd);
      if (c.task.scene_count == 2) {
        EXPECT_EQ(c.environments[0].name, c.environments[1].name);
        EXPECT_NE(c.environments[0].variant, c.environments[1].variant);
        EXPECT_EQ(c.environments[0].class_list, c.environments[1].class_list);
      }
      for (const auto& e : c.environments) {
        if (c.robot.kind == PlatformKind::sim) EXPECT_EQ(e.kind, PlatformKind::sim);
        EXPECT_FALSE(find_clearance_violation(e, c.robot.radius));
      }
      for (const auto& a : c.task.actions) {
        ASSERT_TRUE(c.robot.connections.count(a));
        EXPECT_EQ(c.robot.connections.at(a).channel, Channel::actuator);
      }
      for (const auto& o : c.task.observations) {
        ASSERT_TRUE(c.robot.connections.count(o));
        EXPECT_EQ(c.robot.connections.at(o).channel, Channel::sensor);
      }
      EXPECT_TRUE(p.eval_methods.count(c.eval_method));
    } catch (const Error& e) {
      const std::vector<ErrorCode> allowed = {
          ErrorCode::NotFound, ErrorCode::SceneCountMismatch, ErrorCode::IncompatibleSelection,
          ErrorCode::CapabilityMissing, ErrorCode::InvalidEnvironment};
      EXPECT_NE(std::find(allowed.begin(), allowed.end(), e.code()), allowed.end()) << e.what();
    }
  }
  EXPECT_GT(accepted, 10);
}
