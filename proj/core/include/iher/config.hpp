#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace iher {

// Every knob of the training loop. Parsed from flat "key = value" text where
// keys match the field names below exactly; unknown keys are errors.
struct TrainConfig {
  std::string task = "point-reach";
  std::string algo = "iher";      // iher | her
  std::string ablation = "none";  // none | no_distinguish | no_regen | no_intrinsic
  std::uint64_t seed = 1;

  // outer loop (Algorithm-1 style schedule); unset schedule keys get
  // task-dependent defaults, see finalize_config
  int epochs = 30;                  // E
  int cycles = 50;                  // C
  int batches_per_cycle = 40;       // N
  int real_episodes_per_epoch = 2;  // R
  int imag_episodes_per_cycle = 2;  // I

  // dynamics model
  long model_train_steps = 50;  // K (first training call runs 5K)
  int ensemble_size = 5;        // k
  double model_bias = 2.0;      // b, recency bias for model batches
  double model_lr = 1e-3;
  int model_batch_size = 512;
  std::vector<int> model_hidden{128, 128};

  // curiosity
  double intrinsic_scale = 0.5;  // nu
  double intrinsic_clip = 0.8;   // eta
  bool curiosity_raw_space = false;

  // replay
  int replay_k = 4;
  std::size_t real_buffer_capacity = 1000000;
  std::size_t imag_buffer_capacity = 1000000;
  int batch_size = 256;

  int snapshot_cadence = 50;   // cycles between policy snapshots
  double flip_fraction = 0.1;  // fraction of rollouts with the env_is_real input flipped

  // agent
  double gamma = 0.98;
  double polyak = 0.95;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double random_action_prob = 0.3;
  double action_noise_std = 0.2;
  double action_penalty = 1.0;
  double normalizer_clip = 5.0;
  std::vector<int> actor_hidden{256, 256, 256};
  std::vector<int> critic_hidden{256, 256, 256};

  // environment / evaluation
  int episode_length = 50;
  double success_tolerance = 0.05;
  int eval_episodes = 50;

  // run control
  double early_stop_success = 0.0;  // stop once an epoch's eval rate reaches this (0 = off)
  int rollout_workers = 0;          // threads for imaginary rollouts; 0 = auto
  bool record_wall_clock = true;    // write measured seconds into the metrics CSV
};

// Raw parse result; finalize_config applies task-dependent schedule defaults
// only to keys that were never set explicitly.
struct ParsedConfig {
  TrainConfig config;
  std::set<std::string> explicit_keys;
};

// Throws std::invalid_argument listing every bad line / unknown key.
ParsedConfig parse_config_text(const std::string& text);
ParsedConfig parse_config_file(const std::string& path);

// Single key override (CLI flags route through here).
void set_config_key(ParsedConfig& parsed, const std::string& key, const std::string& value);

// Applies task defaults, then validates; throws std::invalid_argument
// enumerating every violation.
TrainConfig finalize_config(ParsedConfig parsed);

// Canonical flat text with every key; parse_config_text round-trips it.
std::string config_to_text(const TrainConfig& config);

// 17-significant-digit formatting used for configs and the metrics CSV.
std::string format_double(double v);

}  // namespace iher
