#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "iher/config.hpp"
#include "iher/harness.hpp"

namespace {

int run_train(const std::string& config_path, const std::string& task, const std::string& seed,
              const std::string& algo, const std::string& ablation, const std::string& out_dir) {
  iher::ParsedConfig parsed =
      config_path.empty() ? iher::ParsedConfig{} : iher::parse_config_file(config_path);
  if (!task.empty()) iher::set_config_key(parsed, "task", task);
  if (!seed.empty()) iher::set_config_key(parsed, "seed", seed);
  if (!algo.empty()) iher::set_config_key(parsed, "algo", algo);
  if (!ablation.empty()) iher::set_config_key(parsed, "ablation", ablation);
  const iher::TrainConfig cfg = iher::finalize_config(std::move(parsed));

  iher::TrainResult result = iher::train(cfg, out_dir);
  const iher::MetricsRow& last = result.metrics.back();
  std::printf("trained %zu epochs on %s (%s), final eval success %.3f\n", result.metrics.size(),
              cfg.task.c_str(), cfg.algo.c_str(), last.eval_success_rate);
  std::printf("metrics: %s\ncheckpoint: %s\n", result.metrics_path.c_str(), result.checkpoint_path.c_str());
  return 0;
}

int run_eval(const std::string& checkpoint_path, int episodes, std::uint64_t seed) {
  auto trainer = iher::Trainer::load_checkpoint(checkpoint_path);
  auto env = iher::make_env(trainer->config().task,
                            {trainer->config().episode_length, trainer->config().success_tolerance});
  const double rate = iher::evaluate(trainer->agent().freeze(0), *env, episodes, seed);
  std::printf("task %s: success rate %.4f over %d episodes\n", trainer->config().task.c_str(), rate, episodes);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iher: model-based multi-goal RL trainer with imaginary replay"};
  app.require_subcommand(1);

  std::string config_path, task, seed_str, algo, ablation, out_dir = "out";
  CLI::App* train = app.add_subcommand("train", "train a policy per the config file");
  train->add_option("--config", config_path, "flat key = value config file");
  train->add_option("--task", task, "point-reach | point-push | point-slide");
  train->add_option("--seed", seed_str, "master seed");
  train->add_option("--algo", algo, "iher | her");
  train->add_option("--ablation", ablation, "none | no_distinguish | no_regen | no_intrinsic");
  train->add_option("--out", out_dir, "output directory for metrics.csv and checkpoint.iher");

  std::string checkpoint_path;
  int episodes = 100;
  std::uint64_t eval_seed = 12345;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpointed policy");
  eval->add_option("--checkpoint", checkpoint_path, "checkpoint.iher path")->required();
  eval->add_option("--episodes", episodes, "number of deterministic eval episodes");
  eval->add_option("--seed", eval_seed, "evaluation seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(train)) return run_train(config_path, task, seed_str, algo, ablation, out_dir);
    if (app.got_subcommand(eval)) return run_eval(checkpoint_path, episodes, eval_seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
