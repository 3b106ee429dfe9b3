// taskbench: run a supervisor, submit a solution, evaluate results, sweep
// environments in a batch.
//
// Exit codes: 0 success (including partial batch success), 1 validation or
// total failure, 2 supervisor unreachable. `submit` passes the submission's
// own nonzero exit code through.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "taskbench/batch.hpp"
#include "taskbench/client.hpp"
#include "taskbench/config_pool.hpp"
#include "taskbench/error.hpp"
#include "taskbench/omq_eval.hpp"
#include "taskbench/results.hpp"
#include "taskbench/supervisor.hpp"

namespace fs = std::filesystem;
using namespace taskbench;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConnectivity = 2;

int report_error(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    std::cerr << "error: " << to_string(err->code()) << ": " << err->what() << "\n";
    if (err->code() == ErrorCode::ConnectionError || err->code() == ErrorCode::SupervisorUnhealthy) {
      return kExitConnectivity;
    }
  } else {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kExitFailure;
}

Pools load_pools(const fs::path& root) {
  Pools pools = load_pool(root, LoadMode::lenient);
  for (const auto& issue : pools.issues) {
    std::cerr << "warning: skipped " << issue.file.string() << ": " << issue.message << "\n";
  }
  return pools;
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

struct RunArgs {
  std::string pool_root = "pools";
  std::string task;
  std::string robot;
  std::vector<std::string> envs;
  std::uint64_t seed = 0;
  std::string host = kDefaultHost;
  int port = kDefaultPort;
  bool list_tasks = false;
  bool list_robots = false;
  bool list_envs = false;
  bool list_eval_methods = false;
};

int cmd_run(const RunArgs& a) {
  const Pools pools = load_pools(a.pool_root);
  const std::pair<bool, PoolKind> listings[] = {{a.list_tasks, PoolKind::tasks},
                                                {a.list_robots, PoolKind::robots},
                                                {a.list_envs, PoolKind::environments},
                                                {a.list_eval_methods, PoolKind::eval_methods}};
  bool listed = false;
  for (const auto& [wanted, kind] : listings) {
    if (!wanted) continue;
    for (const auto& id : list_options(pools, kind)) std::cout << id << "\n";
    listed = true;
  }
  if (listed) return 0;

  if (a.task.empty() || a.robot.empty() || a.envs.empty()) {
    std::cerr << "error: run needs --task, --robot and --env\n";
    return kExitFailure;
  }
  ResolvedConfig config = validate_selection(pools, a.task, a.robot, split_list(a.envs), a.seed);

  // Block the stop signals before any server thread exists so only sigwait
  // sees them.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  Supervisor supervisor(std::move(config));
  supervisor.start(a.host, a.port);
  std::cout << "supervisor listening on " << a.host << ":" << supervisor.port() << std::endl;
  int sig = 0;
  sigwait(&stop_signals, &sig);
  std::cout << "stopping supervisor" << std::endl;
  supervisor.stop();
  return 0;
}

struct SubmitArgs {
  std::string command;
  std::string results = "results.json";
  std::string addr;
  int timeout = 0;
};

int cmd_submit(const SubmitArgs& a) {
  const Address addr = a.addr.empty() ? default_address() : parse_address(a.addr);
  ClientHandle::connect(addr);
  SubmissionOptions opts;
  opts.timeout = std::chrono::seconds(a.timeout);
  try {
    const ResultsFile results = run_submission(a.command, addr, a.results, opts);
    std::cout << "results written to " << a.results << " (" << results.objects.size()
              << " objects)\n";
  } catch (const taskbench::SubmissionFailed& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  }
  return 0;
}

struct EvalArgs {
  std::string pool_root = "pools";
  std::vector<std::string> inputs;
  std::string output_dir;
};

fs::path report_path_for(const fs::path& input) {
  return input.parent_path() / (input.stem().string() + ".report.json");
}

int cmd_eval(const EvalArgs& a) {
  const Pools pools = load_pools(a.pool_root);
  std::vector<EvalReport> reports;
  for (const auto& input : a.inputs) {
    try {
      const EvalReport report = score_results(pools, read_results(input));
      const fs::path out = report_path_for(input);
      write_json_atomic(out, to_json(report));
      std::cout << input << ": " << kOmqMetric << " " << report.score << " -> " << out.string()
                << "\n";
      reports.push_back(report);
    } catch (const std::exception& e) {
      std::cerr << input << ": ";
      return report_error(e);
    }
  }
  if (reports.size() > 1) {
    const fs::path dir = a.output_dir.empty() ? fs::path(a.inputs.front()).parent_path()
                                              : fs::path(a.output_dir);
    if (!dir.empty()) fs::create_directories(dir);
    const fs::path out = dir / "summary.json";
    const Summary summary = summarise(reports);
    write_json_atomic(out, to_json(summary));
    std::cout << "mean score " << summary.mean_score << " over " << reports.size()
              << " results -> " << out.string() << "\n";
  }
  return 0;
}

struct BatchArgs {
  std::string pool_root = "pools";
  std::string task;
  std::string robot;
  std::vector<std::string> envs;
  std::string command;
  std::uint64_t seed = 0;
  std::string output_dir = "batch_output";
  std::string host = kDefaultHost;
  int port = kDefaultPort;
  int timeout = 0;
};

int cmd_batch(const BatchArgs& a) {
  const Pools pools = load_pools(a.pool_root);
  BatchSpec spec;
  spec.task_id = a.task;
  spec.robot_id = a.robot;
  spec.env_ids = split_list(a.envs);
  spec.command = a.command;
  spec.seed = a.seed;
  spec.output_dir = a.output_dir;
  spec.host = a.host;
  spec.port = a.port;
  spec.submission_timeout = std::chrono::seconds(a.timeout);

  const PerformanceProfile profile = run_batch(pools, spec, &std::cout);
  const fs::path out = spec.output_dir / "profile.json";
  if (profile.scored() == 0) {
    std::cerr << "error: every batch entry failed; see " << out.string() << "\n";
    return kExitFailure;
  }
  if (profile.scored() < profile.entries.size()) {
    std::cerr << "warning: " << profile.entries.size() - profile.scored() << " of "
              << profile.entries.size() << " entries failed\n";
  }
  std::cout << "mean score " << *profile.mean_score << " over " << profile.scored()
            << " entries -> " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robot task benchmarking harness"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Validate a selection and serve it until interrupted");
  run_cmd->add_option("--pool-root", run.pool_root, "Pool directory")->capture_default_str();
  run_cmd->add_option("--task", run.task, "Task identifier");
  run_cmd->add_option("--robot", run.robot, "Robot identifier");
  run_cmd->add_option("--env,--envs", run.envs, "Environment id(s), repeatable or comma separated");
  run_cmd->add_option("--seed", run.seed, "Simulation seed")->capture_default_str();
  run_cmd->add_option("--host", run.host)->capture_default_str();
  run_cmd->add_option("--port", run.port, "0 picks a free port")->capture_default_str();
  run_cmd->add_flag("--list-tasks", run.list_tasks);
  run_cmd->add_flag("--list-robots", run.list_robots);
  run_cmd->add_flag("--list-envs", run.list_envs);
  run_cmd->add_flag("--list-eval-methods", run.list_eval_methods);

  SubmitArgs submit;
  auto* submit_cmd = app.add_subcommand("submit", "Run a solution against the live supervisor");
  submit_cmd->add_option("--command", submit.command, "Shell command; {addr} and {results} expand")
      ->required();
  submit_cmd->add_option("--results", submit.results, "Results file")->capture_default_str();
  submit_cmd->add_option("--addr", submit.addr, "Supervisor address (default: $TASKBENCH_ADDR)");
  submit_cmd->add_option("--timeout", submit.timeout, "Seconds before the solution is killed");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score results files");
  eval_cmd->add_option("--pool-root", eval.pool_root, "Pool directory")->capture_default_str();
  eval_cmd->add_option("results", eval.inputs, "Results files")->required();
  eval_cmd->add_option("--output-dir", eval.output_dir, "Where summary.json goes");

  BatchArgs batch;
  auto* batch_cmd = app.add_subcommand("batch", "Run and score a solution across environments");
  batch_cmd->add_option("--pool-root", batch.pool_root, "Pool directory")->capture_default_str();
  batch_cmd->add_option("--task", batch.task)->required();
  batch_cmd->add_option("--robot", batch.robot)->required();
  batch_cmd->add_option("--env,--envs", batch.envs,
                        "Environment entries; join scene pairs with '+'")
      ->required();
  batch_cmd->add_option("--command", batch.command)->required();
  batch_cmd->add_option("--seed", batch.seed)->capture_default_str();
  batch_cmd->add_option("--output-dir", batch.output_dir)->capture_default_str();
  batch_cmd->add_option("--host", batch.host)->capture_default_str();
  batch_cmd->add_option("--port", batch.port)->capture_default_str();
  batch_cmd->add_option("--timeout", batch.timeout, "Per-entry submission timeout, seconds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run);
    if (*submit_cmd) return cmd_submit(submit);
    if (*eval_cmd) return cmd_eval(eval);
    if (*batch_cmd) return cmd_batch(batch);
  } catch (const std::exception& e) {
    return report_error(e);
  }
  return kExitFailure;
}
