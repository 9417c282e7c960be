#pragma once

#include <vector>

#include "iher/agent.hpp"
#include "iher/dynamics.hpp"
#include "iher/envs.hpp"
#include "iher/replay.hpp"

namespace iher {

// Ordered store of frozen policies (oldest -> newest) used to refill the
// imaginary buffer with a diverse mix of behaviors.
struct PolicySnapshotStore {
  std::vector<FrozenPolicy> snapshots;

  std::size_t size() const { return snapshots.size(); }
  // iteration order for regeneration
  std::vector<const FrozenPolicy*> newest_first() const;
};

// Appends a deep copy when cycle_index is a positive multiple of cadence.
// Returns true if a snapshot was stored.
bool snapshot_policy(PolicySnapshotStore& store, const FrozenPolicy& policy, long cycle_index, int cadence);

struct ImagRolloutRequest {
  int episode_count = 0;
  bool explore = true;
  double flip_fraction = 0.0;  // fraction of rollouts fed env_is_real = 1 instead of 0
  int epoch_tag = 1;
  int workers = 1;
};

// Model-generated episodes: initial observation drawn from recorded real
// episode starts, goal from the task's goal sampler, one uniformly drawn
// ensemble member per step. Episodes are tagged is_real = false and with the
// generating policy's id. Deterministic for a given rng regardless of workers.
std::vector<Episode> rollout_imaginary(const EnsembleModel& ensemble, const FrozenPolicy& policy,
                                       const std::vector<std::vector<double>>& initial_observations,
                                       const GoalEnv& env, const ImagRolloutRequest& request, Rng& rng);

// Empties the buffer and refills it to its previous occupancy, iterating the
// current policy first and then snapshots newest to oldest, per_policy_quota
// episodes each. Lifetime counters are left untouched. Returns the number of
// episodes generated.
std::size_t regenerate_imag_buffer(const EnsembleModel& ensemble, EpisodeBuffer& imag_buffer,
                                   const PolicySnapshotStore& store, const FrozenPolicy& current_policy,
                                   int per_policy_quota, const std::vector<std::vector<double>>& initial_observations,
                                   const GoalEnv& env, const ImagRolloutRequest& base_request, Rng& rng);

}  // namespace iher
