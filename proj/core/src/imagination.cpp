#include "iher/imagination.hpp"

#include <future>
#include <stdexcept>

namespace iher {

std::vector<const FrozenPolicy*> PolicySnapshotStore::newest_first() const {
  std::vector<const FrozenPolicy*> out;
  out.reserve(snapshots.size());
  for (auto it = snapshots.rbegin(); it != snapshots.rend(); ++it) out.push_back(&*it);
  return out;
}

bool snapshot_policy(PolicySnapshotStore& store, const FrozenPolicy& policy, long cycle_index, int cadence) {
  if (cadence <= 0) throw std::invalid_argument("snapshot_policy: cadence must be positive");
  if (cycle_index <= 0 || cycle_index % cadence != 0) return false;
  store.snapshots.push_back(policy);
  return true;
}

namespace {

Episode generate_episode(const EnsembleModel& ensemble, const FrozenPolicy& policy,
                         const std::vector<std::vector<double>>& initial_observations, const GoalEnv& env,
                         const ImagRolloutRequest& request, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const double bit = coin(rng) < request.flip_fraction ? 1.0 : 0.0;
  std::uniform_int_distribution<std::size_t> init_dist(0, initial_observations.size() - 1);
  std::vector<double> obs = initial_observations[init_dist(rng)];
  const std::vector<double> goal = env.sample_goal(rng);
  std::uniform_int_distribution<int> member_dist(0, ensemble.k() - 1);

  Episode ep;
  ep.epoch_collected = request.epoch_tag;
  ep.policy_id = policy.id;
  ep.is_real = false;
  ep.transitions.reserve(static_cast<std::size_t>(env.spec().episode_length));
  for (int t = 0; t < env.spec().episode_length; ++t) {
    Transition tr;
    tr.obs = {obs, env.achieved_goal_of(obs), goal};
    tr.action = policy.select_action(tr.obs, bit, request.explore, rng);
    const int member = member_dist(rng);
    std::vector<double> next = predict_next(ensemble, member, obs, tr.action);
    tr.next_obs = {next, env.achieved_goal_of(next), goal};
    tr.extrinsic_reward = env.compute_reward(tr.next_obs.achieved_goal, goal);
    tr.is_real = false;
    tr.epoch_collected = request.epoch_tag;
    ep.transitions.push_back(std::move(tr));
    obs = std::move(next);
  }
  return ep;
}

}  // namespace

std::vector<Episode> rollout_imaginary(const EnsembleModel& ensemble, const FrozenPolicy& policy,
                                       const std::vector<std::vector<double>>& initial_observations,
                                       const GoalEnv& env, const ImagRolloutRequest& request, Rng& rng) {
  if (!ensemble.trained()) throw std::runtime_error("rollout_imaginary: ensemble has not been trained");
  if (initial_observations.empty()) throw std::invalid_argument("rollout_imaginary: no recorded initial states");
  const int n = request.episode_count;
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n));
  for (std::uint64_t& s : seeds) s = rng();

  std::vector<Episode> episodes(static_cast<std::size_t>(n));
  const int workers = std::max(1, request.workers);
  if (workers == 1 || n < 2) {
    for (int i = 0; i < n; ++i)
      episodes[static_cast<std::size_t>(i)] =
          generate_episode(ensemble, policy, initial_observations, env, request, seeds[static_cast<std::size_t>(i)]);
  } else {
    // block-partitioned; every episode depends only on its own seed, so the
    // result is identical to the serial path
    const int n_threads = std::min(workers, n);
    std::vector<std::future<void>> futs;
    for (int w = 0; w < n_threads; ++w) {
      futs.push_back(std::async(std::launch::async, [&, w] {
        for (int i = w; i < n; i += n_threads)
          episodes[static_cast<std::size_t>(i)] = generate_episode(ensemble, policy, initial_observations, env,
                                                                   request, seeds[static_cast<std::size_t>(i)]);
      }));
    }
    for (auto& f : futs) f.get();
  }
  return episodes;
}

std::size_t regenerate_imag_buffer(const EnsembleModel& ensemble, EpisodeBuffer& imag_buffer,
                                   const PolicySnapshotStore& store, const FrozenPolicy& current_policy,
                                   int per_policy_quota, const std::vector<std::vector<double>>& initial_observations,
                                   const GoalEnv& env, const ImagRolloutRequest& base_request, Rng& rng) {
  if (per_policy_quota <= 0) throw std::invalid_argument("regenerate_imag_buffer: quota must be positive");
  const std::size_t target_episodes = imag_buffer.episode_count();
  imag_buffer.clear();
  if (target_episodes == 0) return 0;

  std::vector<const FrozenPolicy*> order;
  order.push_back(&current_policy);
  for (const FrozenPolicy* p : store.newest_first()) order.push_back(p);

  std::size_t generated = 0;
  std::size_t policy_idx = 0;
  while (generated < target_episodes) {
    const FrozenPolicy& policy = *order[policy_idx % order.size()];
    ImagRolloutRequest req = base_request;
    req.episode_count =
        static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(per_policy_quota), target_episodes - generated));
    auto episodes = rollout_imaginary(ensemble, policy, initial_observations, env, req, rng);
    for (Episode& ep : episodes) imag_buffer.store_episode(std::move(ep), /*count_lifetime=*/false);
    generated += episodes.size();
    ++policy_idx;
  }
  return generated;
}

}  // namespace iher
