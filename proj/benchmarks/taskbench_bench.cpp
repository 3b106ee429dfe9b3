#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "taskbench/config_pool.hpp"
#include "taskbench/omq_eval.hpp"
#include "taskbench/results.hpp"
#include "taskbench/world_sim.hpp"

using namespace taskbench;

namespace {

const Pools& pools() {
  static const Pools p = load_pool(TASKBENCH_POOL_DIR, LoadMode::strict);
  return p;
}

QualityMatrix random_matrix(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  QualityMatrix q(n, std::vector<double>(n));
  for (auto& row : q) {
    for (auto& x : row) x = u(rng) < 0.3 ? 0.0 : u(rng);
  }
  return q;
}

}  // namespace

static void BM_Assign(benchmark::State& state) {
  const QualityMatrix q = random_matrix(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(assign(q));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Assign)->RangeMultiplier(2)->Range(2, 128)->Complexity();

static void BM_Iou3d(benchmark::State& state) {
  const Box3 a{{0.1, 0.2, 0.3}, {1.0, 0.8, 0.6}};
  const Box3 b{{0.4, 0.1, 0.2}, {0.7, 1.1, 0.9}};
  for (auto _ : state) benchmark::DoNotOptimize(iou3d(a, b));
}
BENCHMARK(BM_Iou3d);

static void BM_SenseLaser(benchmark::State& state) {
  EnvironmentDef env = pools().environments.at("house:1");
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> x(0.5, 7.5), y(0.5, 5.5);
  // Extra short walls away from the start pose.
  while (static_cast<long>(env.walls.size()) < state.range(0)) {
    const Vec2 a{x(rng), y(rng)};
    if (std::hypot(a.x - env.start_pose.x, a.y - env.start_pose.y) < 1.0) continue;
    env.walls.push_back({a, {a.x + 0.1, a.y + 0.1}});
  }
  WorldState s = init_world(env, pools().robots.at("sim_bot"), 0);
  for (auto _ : state) benchmark::DoNotOptimize(sense(s, "laser"));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SenseLaser)->RangeMultiplier(4)->Range(8, 512)->Complexity();

static void BM_StepMotion(benchmark::State& state) {
  const EnvironmentDef& env = pools().environments.at("house:1");
  WorldState s = init_world(env, pools().robots.at("sim_bot"), 0, Localisation::noisy);
  double sign = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        step_motion(s, {MotionKind::move_distance, sign * 1.0}, ControlMode::active));
    sign = -sign;
  }
}
BENCHMARK(BM_StepMotion);

static void BM_Evaluate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> c(0, 20), e(0.3, 1.5), j(-0.1, 0.1);
  EnvironmentDef env = pools().environments.at("house:1");
  env.objects.clear();
  ResultsFile r = prefilled_results("semantic_slam:passive:ground_truth", "object_map",
                                    {{env.name, env.variant}}, env.class_list);
  for (std::size_t i = 0; i < n; ++i) {
    GroundTruthObject o{env.class_list[i % env.class_list.size()], {c(rng), c(rng), 0.5},
                        {e(rng), e(rng), e(rng)}, ObjectState::constant};
    env.objects.push_back(o);
    ObjectProposal p;
    p.label_probs.assign(env.class_list.size(), 0.0);
    p.label_probs[i % env.class_list.size()] = 0.9;
    p.centroid = {o.centroid[0] + j(rng), o.centroid[1] + j(rng), o.centroid[2]};
    p.extent = o.extent;
    r.objects.push_back(p);
  }
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(r, {env}, TaskType::semantic_slam));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Evaluate)->RangeMultiplier(2)->Range(4, 128)->Complexity();

BENCHMARK_MAIN();
