#pragma once

#include <cstdint>
#include <vector>

#include "iher/mlp.hpp"
#include "iher/replay.hpp"
#include "iher/rng.hpp"

namespace iher {

// Per-dimension running mean/std over everything observed so far, applied with
// clipping. Statistics only ever see real data; the env_is_real bit bypasses
// normalization entirely.
struct RunningNormalizer {
  double clip_range = 5.0;
  long long count = 0;
  std::vector<double> sum;
  std::vector<double> sumsq;
  std::vector<double> mean;
  std::vector<double> stdev;

  explicit RunningNormalizer(int dim = 0, double clip = 5.0);

  void update(const std::vector<double>& x);
  std::vector<double> normalize(const std::vector<double>& x) const;
  int dim() const { return static_cast<int>(mean.size()); }
};

struct AgentConfig {
  std::vector<int> actor_hidden{256, 256, 256};
  std::vector<int> critic_hidden{256, 256, 256};
  double gamma = 0.98;
  double polyak = 0.95;  // target <- polyak * target + (1 - polyak) * main
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double noise_std = 0.2;           // gaussian exploration noise, in action units
  double random_action_prob = 0.3;  // epsilon for uniform random actions
  double action_penalty = 1.0;      // coefficient on mean squared action
  double normalizer_clip = 5.0;
  double intrinsic_clip = 0.8;      // eta; sets the upper TD-target bound
  bool force_real_bit = false;      // no_distinguish: env_is_real wired to 1 everywhere

  double q_lower() const { return -1.0 / (1.0 - gamma); }
  double q_upper() const { return intrinsic_clip / (1.0 - gamma); }
};

// A self-contained immutable policy: actor parameters plus the normalizer
// statistics at capture time. Used for snapshots, imaginary rollouts and eval.
struct FrozenPolicy {
  Mlp actor;
  RunningNormalizer obs_norm;
  RunningNormalizer goal_norm;
  double noise_std = 0.2;
  double random_action_prob = 0.3;
  int id = 0;
  bool force_real_bit = false;  // no_distinguish: ignore the caller's bit, always feed 1

  std::vector<double> select_action(const GoalObservation& gobs, double env_is_real_bit, bool explore,
                                    Rng& rng) const;
};

struct UpdateDiag {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double mean_q = 0.0;
};

void polyak_update(const Mlp& main, Mlp& target, double tau);

// Goal-conditioned DDPG over normalized (observation, goal, env_is_real) inputs.
class DdpgAgent {
 public:
  DdpgAgent(int obs_dim, int goal_dim, int action_dim, const AgentConfig& config, std::uint64_t seed);

  std::vector<double> select_action(const GoalObservation& gobs, double env_is_real_bit, bool explore,
                                    Rng& rng) const;

  // One critic + actor Adam step on a HER-relabeled, reward-augmented batch,
  // followed by Polyak target updates. Uses each transition's true is_real bit
  // (unless force_real_bit). Throws on non-finite losses.
  UpdateDiag update(const std::vector<SampledTransition>& batch);

  // Normalizer update from a real episode; imaginary data must never pass through here.
  void observe_real_episode(const Episode& episode);

  // The exact gradient the actor step descends (loss = -mean Q(s, pi(s)) plus
  // the action penalty); exposed so tests can check it against finite differences.
  std::vector<Layer> actor_gradient(const std::vector<SampledTransition>& batch) const;

  FrozenPolicy freeze(int id) const;

  const AgentConfig& config() const { return cfg_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& target_actor() const { return target_actor_; }
  const Mlp& target_critic() const { return target_critic_; }
  const RunningNormalizer& obs_normalizer() const { return obs_norm_; }
  const RunningNormalizer& goal_normalizer() const { return goal_norm_; }
  const AdamState& actor_adam() const { return actor_adam_; }
  const AdamState& critic_adam() const { return critic_adam_; }

  // mutable access for checkpoint restore and tests
  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }
  Mlp& target_actor() { return target_actor_; }
  Mlp& target_critic() { return target_critic_; }
  AdamState& actor_adam() { return actor_adam_; }
  AdamState& critic_adam() { return critic_adam_; }
  RunningNormalizer& obs_normalizer() { return obs_norm_; }
  RunningNormalizer& goal_normalizer() { return goal_norm_; }

 private:
  struct BatchInputs {
    Matrix x_cur;
    Matrix x_next;
    Matrix actions;
    std::vector<double> rewards;
  };
  BatchInputs build_inputs(const std::vector<SampledTransition>& batch) const;

  struct ActorGrad {
    std::vector<Layer> grads;
    double actor_loss = 0.0;
    double mean_q = 0.0;
  };
  ActorGrad compute_actor_gradient(const Matrix& x_cur) const;

  int obs_dim_, goal_dim_, action_dim_;
  AgentConfig cfg_;
  Mlp actor_, critic_, target_actor_, target_critic_;
  AdamState actor_adam_, critic_adam_;
  RunningNormalizer obs_norm_, goal_norm_;
};

}  // namespace iher
