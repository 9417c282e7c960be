#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "iher/envs.hpp"
#include "iher/rng.hpp"

namespace iher {

struct Transition {
  GoalObservation obs;
  std::vector<double> action;
  GoalObservation next_obs;
  double extrinsic_reward = -1.0;
  bool is_real = true;
  int epoch_collected = 1;  // 1-indexed
};

struct Episode {
  std::vector<Transition> transitions;
  int epoch_collected = 1;
  int policy_id = 0;  // 0 = live policy, >0 = snapshot id
  bool is_real = true;

  int length() const { return static_cast<int>(transitions.size()); }
};

// Ring of whole fixed-length episodes. Capacity is counted in transitions and
// eviction drops the oldest episode first. The lifetime counter N(.) keeps
// counting across evictions and is untouched by clear()/regeneration stores.
class EpisodeBuffer {
 public:
  EpisodeBuffer(std::size_t capacity_transitions, int episode_length);

  void store_episode(Episode episode, bool count_lifetime = true);
  void clear();

  std::size_t size() const { return size_; }  // transitions currently held
  std::size_t episode_count() const { return episodes_.size(); }
  bool empty() const { return episodes_.empty(); }
  unsigned long long lifetime_stored() const { return lifetime_; }
  int episode_length() const { return episode_length_; }
  std::size_t capacity() const { return capacity_; }

  const Episode& episode(std::size_t index) const { return episodes_[index]; }  // oldest first

  // checkpoint restore only
  void set_lifetime(unsigned long long v) { lifetime_ = v; }

 private:
  std::size_t capacity_;
  int episode_length_;
  std::deque<Episode> episodes_;
  std::size_t size_ = 0;
  unsigned long long lifetime_ = 0;
};

// A transition sampled out of a buffer, still attached to its source episode
// so HER can look up goals achieved later in the same episode. training_reward
// starts as the stored extrinsic reward; relabeling and intrinsic bonuses
// rewrite it at sample time, never in the buffer.
struct SampledTransition {
  Transition t;
  const Episode* source = nullptr;
  int step = 0;
  double training_reward = -1.0;
};

std::vector<SampledTransition> sample_uniform(const EpisodeBuffer& buffer, int count, Rng& rng);

// Mixed batch with round(batch_size * p_imag) imaginary transitions, where
// p_imag = N(imag) / (N(imag) + N(real)) over lifetime counters.
std::vector<SampledTransition> dual_sample(const EpisodeBuffer& real_buffer, const EpisodeBuffer& imag_buffer,
                                           int batch_size, Rng& rng);

double p_imag(const EpisodeBuffer& real_buffer, const EpisodeBuffer& imag_buffer);

// Future-goal relabeling: with probability replay_k/(replay_k+1) the desired
// goal becomes the achieved goal of a uniformly drawn step >= the sampled one,
// and the reward is recomputed against it.
void her_relabel(std::vector<SampledTransition>& batch, int replay_k, double success_tolerance, Rng& rng);

// Recency-biased draw for dynamics-model training: transition i is sampled
// with probability proportional to w(i) = (epoch(i)/current_epoch) * (bias - 1);
// bias = 1 degenerates to all-zero weights and falls back to uniform.
std::vector<SampledTransition> sample_biased_for_model(const EpisodeBuffer& buffer, int count, int current_epoch,
                                                       double bias, Rng& rng);

}  // namespace iher
