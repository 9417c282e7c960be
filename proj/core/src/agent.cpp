#include "iher/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace iher {

namespace {

constexpr double kStdFloor = 1e-2;  // matches common HER-DDPG practice

std::vector<double> actor_input(const RunningNormalizer& obs_norm, const RunningNormalizer& goal_norm,
                                const std::vector<double>& obs, const std::vector<double>& goal, double bit) {
  std::vector<double> x = obs_norm.normalize(obs);
  const std::vector<double> g = goal_norm.normalize(goal);
  x.insert(x.end(), g.begin(), g.end());
  x.push_back(bit);
  return x;
}

std::vector<double> select_action_impl(const Mlp& actor, const RunningNormalizer& obs_norm,
                                       const RunningNormalizer& goal_norm, double noise_std, double eps,
                                       const GoalObservation& gobs, double bit, bool explore, Rng& rng) {
  const int action_dim = actor.output_dim();
  if (explore) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < eps) {
      std::uniform_real_distribution<double> box(-1.0, 1.0);
      std::vector<double> a(static_cast<std::size_t>(action_dim));
      for (double& v : a) v = box(rng);
      return a;
    }
  }
  std::vector<double> a = forward(actor, actor_input(obs_norm, goal_norm, gobs.observation, gobs.desired_goal, bit));
  if (explore) {
    std::normal_distribution<double> gauss(0.0, noise_std);
    for (double& v : a) v = std::clamp(v + gauss(rng), -1.0, 1.0);
  }
  return a;
}

}  // namespace

RunningNormalizer::RunningNormalizer(int dim, double clip)
    : clip_range(clip),
      sum(static_cast<std::size_t>(dim), 0.0),
      sumsq(static_cast<std::size_t>(dim), 0.0),
      mean(static_cast<std::size_t>(dim), 0.0),
      stdev(static_cast<std::size_t>(dim), 1.0) {}

void RunningNormalizer::update(const std::vector<double>& x) {
  if (x.size() != mean.size()) throw std::invalid_argument("RunningNormalizer::update: dimension mismatch");
  count += 1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum[i] += x[i];
    sumsq[i] += x[i] * x[i];
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean[i] = sum[i] / static_cast<double>(count);
    const double var = sumsq[i] / static_cast<double>(count) - mean[i] * mean[i];
    stdev[i] = std::sqrt(std::max(var, kStdFloor * kStdFloor));
  }
}

std::vector<double> RunningNormalizer::normalize(const std::vector<double>& x) const {
  if (x.size() != mean.size()) throw std::invalid_argument("RunningNormalizer::normalize: dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = std::clamp((x[i] - mean[i]) / stdev[i], -clip_range, clip_range);
  return out;
}

std::vector<double> FrozenPolicy::select_action(const GoalObservation& gobs, double env_is_real_bit, bool explore,
                                                Rng& rng) const {
  const double bit = force_real_bit ? 1.0 : env_is_real_bit;
  return select_action_impl(actor, obs_norm, goal_norm, noise_std, random_action_prob, gobs, bit, explore, rng);
}

void polyak_update(const Mlp& main, Mlp& target, double tau) {
  if (main.layer_sizes != target.layer_sizes) throw std::invalid_argument("polyak_update: shape mismatch");
  for (std::size_t li = 0; li < main.layers.size(); ++li) {
    const Layer& m = main.layers[li];
    Layer& t = target.layers[li];
    for (std::size_t i = 0; i < m.w.size(); ++i) t.w[i] = tau * t.w[i] + (1.0 - tau) * m.w[i];
    for (std::size_t i = 0; i < m.b.size(); ++i) t.b[i] = tau * t.b[i] + (1.0 - tau) * m.b[i];
  }
}

DdpgAgent::DdpgAgent(int obs_dim, int goal_dim, int action_dim, const AgentConfig& config, std::uint64_t seed)
    : obs_dim_(obs_dim),
      goal_dim_(goal_dim),
      action_dim_(action_dim),
      cfg_(config),
      actor_(make_mlp(
          [&] {
            std::vector<int> s{obs_dim + goal_dim + 1};
            s.insert(s.end(), config.actor_hidden.begin(), config.actor_hidden.end());
            s.push_back(action_dim);
            return s;
          }(),
          Activation::Relu, Activation::Tanh, mix_seed(seed, 0x6163746f))),
      critic_(make_mlp(
          [&] {
            std::vector<int> s{obs_dim + goal_dim + 1 + action_dim};
            s.insert(s.end(), config.critic_hidden.begin(), config.critic_hidden.end());
            s.push_back(1);
            return s;
          }(),
          Activation::Relu, Activation::Identity, mix_seed(seed, 0x63726974))),
      target_actor_(actor_),
      target_critic_(critic_),
      actor_adam_(make_adam(actor_, config.actor_lr)),
      critic_adam_(make_adam(critic_, config.critic_lr)),
      obs_norm_(obs_dim, config.normalizer_clip),
      goal_norm_(goal_dim, config.normalizer_clip) {}

std::vector<double> DdpgAgent::select_action(const GoalObservation& gobs, double env_is_real_bit, bool explore,
                                             Rng& rng) const {
  const double bit = cfg_.force_real_bit ? 1.0 : env_is_real_bit;
  return select_action_impl(actor_, obs_norm_, goal_norm_, cfg_.noise_std, cfg_.random_action_prob, gobs, bit,
                            explore, rng);
}

void DdpgAgent::observe_real_episode(const Episode& episode) {
  for (const Transition& t : episode.transitions) {
    obs_norm_.update(t.obs.observation);
    goal_norm_.update(t.obs.desired_goal);
    goal_norm_.update(t.next_obs.achieved_goal);  // relabeled goals come from here
  }
  if (!episode.transitions.empty()) obs_norm_.update(episode.transitions.back().next_obs.observation);
}

FrozenPolicy DdpgAgent::freeze(int id) const {
  FrozenPolicy p{actor_, obs_norm_, goal_norm_, cfg_.noise_std, cfg_.random_action_prob, id, cfg_.force_real_bit};
  return p;
}

DdpgAgent::BatchInputs DdpgAgent::build_inputs(const std::vector<SampledTransition>& batch) const {
  const int n = static_cast<int>(batch.size());
  const int in_dim = obs_dim_ + goal_dim_ + 1;
  BatchInputs in{Matrix(n, in_dim), Matrix(n, in_dim), Matrix(n, action_dim_),
                 std::vector<double>(static_cast<std::size_t>(n))};
  for (int i = 0; i < n; ++i) {
    const SampledTransition& s = batch[static_cast<std::size_t>(i)];
    const double bit = cfg_.force_real_bit ? 1.0 : (s.t.is_real ? 1.0 : 0.0);
    in.x_cur.set_row(i, actor_input(obs_norm_, goal_norm_, s.t.obs.observation, s.t.obs.desired_goal, bit));
    in.x_next.set_row(i,
                      actor_input(obs_norm_, goal_norm_, s.t.next_obs.observation, s.t.next_obs.desired_goal, bit));
    in.actions.set_row(i, s.t.action);
    in.rewards[static_cast<std::size_t>(i)] = s.training_reward;
  }
  return in;
}

namespace {

Matrix with_actions(const Matrix& x, const Matrix& a) {
  Matrix out(x.rows, x.cols + a.cols);
  for (int i = 0; i < x.rows; ++i) {
    double* r = out.row(i);
    const double* xr = x.row(i);
    for (int c = 0; c < x.cols; ++c) r[c] = xr[c];
    const double* ar = a.row(i);
    for (int c = 0; c < a.cols; ++c) r[x.cols + c] = ar[c];
  }
  return out;
}

}  // namespace

DdpgAgent::ActorGrad DdpgAgent::compute_actor_gradient(const Matrix& x_cur) const {
  const int n = x_cur.rows;
  const int in_dim = obs_dim_ + goal_dim_ + 1;

  ForwardTrace actor_trace;
  const Matrix pi = forward(actor_, x_cur, &actor_trace);
  ForwardTrace critic_pi_trace;
  const Matrix q_pi = forward(critic_, with_actions(x_cur, pi), &critic_pi_trace);
  Matrix ones(n, 1, 1.0);
  const auto critic_input_grads = backward(critic_, critic_pi_trace, ones).input_grads;

  // d(-mean Q + penalty)/dpi, scaled so backward's batch averaging lands on the loss gradient
  Matrix actor_upstream(n, action_dim_);
  double mean_q = 0.0;
  double penalty = 0.0;
  for (int i = 0; i < n; ++i) {
    mean_q += q_pi(i, 0);
    for (int c = 0; c < action_dim_; ++c) {
      const double a = pi(i, c);
      penalty += a * a;
      actor_upstream(i, c) = -critic_input_grads(i, in_dim + c) + 2.0 * cfg_.action_penalty * a / action_dim_;
    }
  }
  mean_q /= n;
  penalty = cfg_.action_penalty * penalty / (static_cast<double>(n) * action_dim_);

  ActorGrad out;
  out.grads = backward(actor_, actor_trace, actor_upstream).param_grads;
  out.mean_q = mean_q;
  out.actor_loss = -mean_q + penalty;
  return out;
}

std::vector<Layer> DdpgAgent::actor_gradient(const std::vector<SampledTransition>& batch) const {
  if (batch.empty()) throw std::invalid_argument("actor_gradient: empty batch");
  return compute_actor_gradient(build_inputs(batch).x_cur).grads;
}

UpdateDiag DdpgAgent::update(const std::vector<SampledTransition>& batch) {
  const int n = static_cast<int>(batch.size());
  if (n == 0) throw std::invalid_argument("update: empty batch");
  const BatchInputs in = build_inputs(batch);

  // TD targets from the target networks, clipped to the return range
  const Matrix next_actions = forward(target_actor_, in.x_next);
  const Matrix q_next = forward(target_critic_, with_actions(in.x_next, next_actions));
  std::vector<double> targets(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    targets[static_cast<std::size_t>(i)] = std::clamp(
        in.rewards[static_cast<std::size_t>(i)] + cfg_.gamma * q_next(i, 0), cfg_.q_lower(), cfg_.q_upper());

  // critic regression
  ForwardTrace critic_trace;
  const Matrix q = forward(critic_, with_actions(in.x_cur, in.actions), &critic_trace);
  Matrix critic_upstream(n, 1);
  double critic_loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double diff = q(i, 0) - targets[static_cast<std::size_t>(i)];
    critic_upstream(i, 0) = 2.0 * diff;
    critic_loss += diff * diff;
  }
  critic_loss /= n;
  if (!std::isfinite(critic_loss)) throw std::runtime_error("update: non-finite critic loss");

  const ActorGrad actor_grad = compute_actor_gradient(in.x_cur);
  if (!std::isfinite(actor_grad.actor_loss)) throw std::runtime_error("update: non-finite actor loss");

  auto critic_grads = backward(critic_, critic_trace, critic_upstream);
  adam_update(critic_, critic_grads.param_grads, critic_adam_);
  adam_update(actor_, actor_grad.grads, actor_adam_);

  polyak_update(actor_, target_actor_, cfg_.polyak);
  polyak_update(critic_, target_critic_, cfg_.polyak);

  return {critic_loss, actor_grad.actor_loss, actor_grad.mean_q};
}

}  // namespace iher
