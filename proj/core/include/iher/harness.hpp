#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "iher/agent.hpp"
#include "iher/config.hpp"
#include "iher/curiosity.hpp"
#include "iher/dynamics.hpp"
#include "iher/envs.hpp"
#include "iher/imagination.hpp"
#include "iher/replay.hpp"

namespace iher {

struct MetricsRow {
  int epoch = 0;
  long long real_steps_total = 0;
  long long imag_steps_total = 0;
  double eval_success_rate = 0.0;
  double mean_intrinsic_reward = 0.0;
  double model_loss = 0.0;
  double p_imag = 0.0;
  double wall_clock_seconds = 0.0;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);

// Call counts into the model-based modules; the HER baseline must finish a run
// with every one of these at zero.
struct ModuleCounters {
  long model_train_calls = 0;
  long regen_invocations = 0;
  long imag_episodes_generated = 0;
  long curiosity_batches = 0;
};

struct TrainResult {
  std::vector<MetricsRow> metrics;
  ModuleCounters counters;
  std::string metrics_path;
  std::string checkpoint_path;
};

// Deterministic-policy success rate over n episodes: an episode counts as a
// success iff the goal is satisfied at its final step. Seeds derive from
// `seed`; two calls with equal arguments return identical rates.
using ActionFn = std::function<std::vector<double>(const GoalObservation&)>;
double evaluate(const ActionFn& policy, GoalEnv& env, int n_episodes, std::uint64_t seed);
double evaluate(const FrozenPolicy& policy, GoalEnv& env, int n_episodes, std::uint64_t seed,
                double env_is_real_bit = 1.0);

// The outer training loop: per epoch, collect real episodes (10% of rollouts
// with the env_is_real input flipped), train the ensemble, regenerate the
// imaginary buffer, then run cycles of imaginary collection and mixed-batch
// updates; snapshot the policy on the cycle cadence and evaluate. algo=her
// runs the same loop with every model-based phase skipped.
class Trainer {
 public:
  explicit Trainer(const TrainConfig& config);

  // Runs the remaining epochs, streaming metrics.csv under out_dir and writing
  // checkpoint.iher at the end. Pass an empty out_dir to skip file output.
  TrainResult run(const std::string& out_dir);

  void run_epoch();
  bool finished() const;

  double evaluate_current_policy(int epoch) const;

  void save_checkpoint(const std::string& path) const;
  static std::unique_ptr<Trainer> load_checkpoint(const std::string& path);
  // Refuses (std::runtime_error) if the checkpoint's task differs.
  static std::unique_ptr<Trainer> load_checkpoint(const std::string& path, const std::string& expected_task);

  const TrainConfig& config() const { return cfg_; }
  const std::vector<MetricsRow>& metrics() const { return metrics_; }
  const ModuleCounters& counters() const { return counters_; }
  const EpisodeBuffer& real_buffer() const { return real_buf_; }
  const EpisodeBuffer& imag_buffer() const { return imag_buf_; }
  const DdpgAgent& agent() const { return agent_; }
  const std::optional<EnsembleModel>& ensemble() const { return ensemble_; }
  const PolicySnapshotStore& snapshot_store() const { return snapshots_; }
  const GoalEnv& env() const { return *env_; }
  int epochs_completed() const { return epochs_completed_; }
  bool model_based() const { return cfg_.algo == "iher"; }

 private:
  void collect_real_episodes();
  double intrinsic_scale_effective() const;
  int worker_count() const;

  TrainConfig cfg_;
  std::unique_ptr<GoalEnv> env_;
  DdpgAgent agent_;
  std::optional<EnsembleModel> ensemble_;
  EpisodeBuffer real_buf_;
  EpisodeBuffer imag_buf_;
  PolicySnapshotStore snapshots_;
  std::vector<std::vector<double>> initial_obs_;
  std::vector<MetricsRow> metrics_;
  ModuleCounters counters_;

  int epochs_completed_ = 0;
  long global_cycle_ = 0;
  int next_snapshot_id_ = 1;
  long long real_steps_total_ = 0;
  long long imag_steps_total_ = 0;
  double last_model_loss_ = 0.0;
  double epoch_intrinsic_sum_ = 0.0;
  long long epoch_intrinsic_count_ = 0;
  bool early_stopped_ = false;
  double elapsed_seconds_ = 0.0;

  Rng rng_collect_;
  Rng rng_model_;
  Rng rng_rollout_;
  Rng rng_sample_;
};

// Convenience wrapper: build a trainer from config and run it to completion.
TrainResult train(const TrainConfig& config, const std::string& out_dir);

}  // namespace iher
