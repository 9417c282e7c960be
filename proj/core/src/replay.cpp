#include "iher/replay.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace iher {

EpisodeBuffer::EpisodeBuffer(std::size_t capacity_transitions, int episode_length)
    : capacity_(capacity_transitions), episode_length_(episode_length) {
  if (episode_length_ <= 0) throw std::invalid_argument("EpisodeBuffer: episode length must be positive");
  if (capacity_ < static_cast<std::size_t>(episode_length_))
    throw std::invalid_argument("EpisodeBuffer: capacity below one episode");
}

void EpisodeBuffer::store_episode(Episode episode, bool count_lifetime) {
  if (episode.length() != episode_length_)
    throw std::invalid_argument("store_episode: episode length " + std::to_string(episode.length()) +
                                ", expected " + std::to_string(episode_length_));
  while (size_ + static_cast<std::size_t>(episode_length_) > capacity_) {
    size_ -= episodes_.front().transitions.size();
    episodes_.pop_front();
  }
  size_ += episode.transitions.size();
  if (count_lifetime) lifetime_ += episode.transitions.size();
  episodes_.push_back(std::move(episode));
}

void EpisodeBuffer::clear() {
  episodes_.clear();
  size_ = 0;
}

namespace {

SampledTransition pick(const EpisodeBuffer& buffer, std::size_t episode_index, int step) {
  const Episode& ep = buffer.episode(episode_index);
  SampledTransition s;
  s.t = ep.transitions[static_cast<std::size_t>(step)];
  s.source = &ep;
  s.step = step;
  s.training_reward = s.t.extrinsic_reward;
  return s;
}

}  // namespace

std::vector<SampledTransition> sample_uniform(const EpisodeBuffer& buffer, int count, Rng& rng) {
  if (buffer.empty()) throw std::invalid_argument("sample_uniform: buffer is empty");
  std::uniform_int_distribution<std::size_t> ep_dist(0, buffer.episode_count() - 1);
  std::uniform_int_distribution<int> step_dist(0, buffer.episode_length() - 1);
  std::vector<SampledTransition> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const std::size_t e = ep_dist(rng);
    const int t = step_dist(rng);
    out.push_back(pick(buffer, e, t));
  }
  return out;
}

double p_imag(const EpisodeBuffer& real_buffer, const EpisodeBuffer& imag_buffer) {
  const double ni = static_cast<double>(imag_buffer.lifetime_stored());
  const double nr = static_cast<double>(real_buffer.lifetime_stored());
  if (ni + nr <= 0.0) return 0.0;
  return ni / (ni + nr);
}

std::vector<SampledTransition> dual_sample(const EpisodeBuffer& real_buffer, const EpisodeBuffer& imag_buffer,
                                           int batch_size, Rng& rng) {
  if (real_buffer.empty()) throw std::invalid_argument("dual_sample: real buffer is empty");
  double p = p_imag(real_buffer, imag_buffer);
  if (imag_buffer.empty()) p = 0.0;
  const int n_imag = static_cast<int>(std::lround(batch_size * p));
  const int n_real = batch_size - n_imag;
  std::vector<SampledTransition> batch;
  batch.reserve(static_cast<std::size_t>(batch_size));
  if (n_imag > 0) {
    auto imag = sample_uniform(imag_buffer, n_imag, rng);
    batch.insert(batch.end(), imag.begin(), imag.end());
  }
  if (n_real > 0) {
    auto real = sample_uniform(real_buffer, n_real, rng);
    batch.insert(batch.end(), real.begin(), real.end());
  }
  return batch;
}

void her_relabel(std::vector<SampledTransition>& batch, int replay_k, double success_tolerance, Rng& rng) {
  if (replay_k < 0) throw std::invalid_argument("her_relabel: replay_k must be non-negative");
  if (replay_k == 0) return;
  const double p_relabel = static_cast<double>(replay_k) / (replay_k + 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (SampledTransition& s : batch) {
    if (coin(rng) >= p_relabel) continue;
    const int last = s.source->length() - 1;
    // pick a step >= the sampled one; its post-step achieved goal is a goal
    // reached later in the episode (the final step relabels to its own
    // next achieved goal)
    std::uniform_int_distribution<int> future(s.step, last);
    const int j = future(rng);
    const std::vector<double>& new_goal = s.source->transitions[static_cast<std::size_t>(j)].next_obs.achieved_goal;
    s.t.obs.desired_goal = new_goal;
    s.t.next_obs.desired_goal = new_goal;
    s.t.extrinsic_reward = sparse_reward(s.t.next_obs.achieved_goal, new_goal, success_tolerance);
    s.training_reward = s.t.extrinsic_reward;
  }
}

std::vector<SampledTransition> sample_biased_for_model(const EpisodeBuffer& buffer, int count, int current_epoch,
                                                       double bias, Rng& rng) {
  if (buffer.empty()) throw std::invalid_argument("sample_biased_for_model: buffer is empty");
  if (bias < 1.0) throw std::invalid_argument("sample_biased_for_model: bias must be >= 1");
  if (current_epoch <= 0) throw std::invalid_argument("sample_biased_for_model: current_epoch must be positive");

  if (bias == 1.0) return sample_uniform(buffer, count, rng);  // all-zero weights; fall back to uniform

  // all transitions of an episode share its epoch, so episode weight is
  // episode_length * w(epoch); drawing an episode then a uniform step inside
  // it reproduces the per-transition probabilities exactly
  const std::size_t n_eps = buffer.episode_count();
  std::vector<double> weights(n_eps);
  bool any_positive = false;
  for (std::size_t e = 0; e < n_eps; ++e) {
    const int epoch = buffer.episode(e).epoch_collected;
    const double w = (static_cast<double>(epoch) / current_epoch) * (bias - 1.0);
    weights[e] = w * buffer.episode(e).length();
    if (weights[e] > 0.0) any_positive = true;
  }
  if (!any_positive) return sample_uniform(buffer, count, rng);

  std::discrete_distribution<std::size_t> ep_dist(weights.begin(), weights.end());
  std::uniform_int_distribution<int> step_dist(0, buffer.episode_length() - 1);
  std::vector<SampledTransition> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const std::size_t e = ep_dist(rng);
    const int t = step_dist(rng);
    out.push_back(pick(buffer, e, t));
  }
  return out;
}

}  // namespace iher
