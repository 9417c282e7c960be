#include "iher/dynamics.hpp"

#include <cmath>
#include <future>
#include <stdexcept>
#include <string>

namespace iher {

namespace {

constexpr double kStdFloor = 1e-6;

std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Normalizer fit_normalizer(int dim, const EpisodeBuffer& buffer, bool deltas) {
  std::vector<double> sum(dim, 0.0), sumsq(dim, 0.0);
  std::size_t n = 0;
  for (std::size_t e = 0; e < buffer.episode_count(); ++e) {
    for (const Transition& t : buffer.episode(e).transitions) {
      for (int d = 0; d < dim; ++d) {
        double v;
        if (deltas) {
          v = t.next_obs.observation[d] - t.obs.observation[d];
        } else {
          const int obs_dim = static_cast<int>(t.obs.observation.size());
          v = d < obs_dim ? t.obs.observation[d] : t.action[d - obs_dim];
        }
        sum[d] += v;
        sumsq[d] += v * v;
      }
      ++n;
    }
  }
  Normalizer norm;
  norm.mean.resize(dim);
  norm.stdev.resize(dim);
  for (int d = 0; d < dim; ++d) {
    const double mu = sum[d] / static_cast<double>(n);
    const double var = sumsq[d] / static_cast<double>(n) - mu * mu;
    norm.mean[d] = mu;
    norm.stdev[d] = std::sqrt(std::max(var, 0.0));
    if (norm.stdev[d] < kStdFloor) norm.stdev[d] = kStdFloor;
  }
  return norm;
}

}  // namespace

Normalizer Normalizer::identity(int dim) {
  Normalizer n;
  n.mean.assign(dim, 0.0);
  n.stdev.assign(dim, 1.0);
  return n;
}

std::vector<double> Normalizer::normalize(const std::vector<double>& x) const {
  if (x.size() != mean.size()) throw std::invalid_argument("Normalizer::normalize: dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean[i]) / stdev[i];
  return out;
}

std::vector<double> Normalizer::denormalize(const std::vector<double>& x) const {
  if (x.size() != mean.size()) throw std::invalid_argument("Normalizer::denormalize: dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * stdev[i] + mean[i];
  return out;
}

EnsembleModel make_ensemble(int k, int state_dim, int action_dim, const std::vector<int>& hidden_sizes,
                            double learning_rate, std::uint64_t seed) {
  if (k <= 0) throw std::invalid_argument("make_ensemble: k must be positive");
  EnsembleModel ens;
  ens.state_dim = state_dim;
  ens.action_dim = action_dim;
  std::vector<int> sizes;
  sizes.push_back(state_dim + action_dim);
  sizes.insert(sizes.end(), hidden_sizes.begin(), hidden_sizes.end());
  sizes.push_back(state_dim);
  for (int m = 0; m < k; ++m) {
    ens.members.push_back(make_mlp(sizes, Activation::Relu, Activation::Identity,
                                   mix_seed(seed, 0x656e73, static_cast<std::uint64_t>(m))));
    ens.adam_states.push_back(make_adam(ens.members.back(), learning_rate));
  }
  ens.input_norm = Normalizer::identity(state_dim + action_dim);
  ens.delta_norm = Normalizer::identity(state_dim);
  return ens;
}

namespace {

struct MemberResult {
  double loss_start = 0.0;
  double loss_end = 0.0;
};

MemberResult train_one_member(Mlp& member, AdamState& adam, const EnsembleModel& ens,
                              const EpisodeBuffer& buffer, long steps, int batch_size, int current_epoch,
                              double bias, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  MemberResult res;
  const int in_dim = ens.state_dim + ens.action_dim;
  for (long step = 0; step < steps; ++step) {
    auto batch = sample_biased_for_model(buffer, batch_size, current_epoch, bias, rng);
    const int n = static_cast<int>(batch.size());
    Matrix X(n, in_dim);
    Matrix T(n, ens.state_dim);
    for (int i = 0; i < n; ++i) {
      const Transition& t = batch[static_cast<std::size_t>(i)].t;
      const auto x = ens.input_norm.normalize(concat(t.obs.observation, t.action));
      X.set_row(i, x);
      std::vector<double> delta(ens.state_dim);
      for (int d = 0; d < ens.state_dim; ++d) delta[d] = t.next_obs.observation[d] - t.obs.observation[d];
      T.set_row(i, ens.delta_norm.normalize(delta));
    }
    ForwardTrace trace;
    Matrix P = forward(member, X, &trace);
    Matrix upstream(n, ens.state_dim);
    double loss = 0.0;
    for (std::size_t i = 0; i < P.data.size(); ++i) {
      const double diff = P.data[i] - T.data[i];
      upstream.data[i] = 2.0 * diff;
      loss += diff * diff;
    }
    loss /= static_cast<double>(n);
    if (step == 0) res.loss_start = loss;
    if (step + 1 == steps) res.loss_end = loss;
    auto grads = backward(member, trace, upstream);
    adam_update(member, grads.param_grads, adam);
  }
  return res;
}

}  // namespace

ModelTrainReport train_models(EnsembleModel& ensemble, const EpisodeBuffer& real_buffer, long steps,
                              int batch_size, int current_epoch, double bias, Rng& rng, int workers) {
  if (real_buffer.empty()) throw std::invalid_argument("train_models: real buffer is empty");

  ensemble.input_norm = fit_normalizer(ensemble.state_dim + ensemble.action_dim, real_buffer, false);
  ensemble.delta_norm = fit_normalizer(ensemble.state_dim, real_buffer, true);

  const long effective_steps = ensemble.train_calls == 0 ? 5 * steps : steps;

  // per-member seeds drawn up-front so parallel and serial training agree
  std::vector<std::uint64_t> seeds;
  for (int m = 0; m < ensemble.k(); ++m) seeds.push_back(rng());

  std::vector<MemberResult> results(static_cast<std::size_t>(ensemble.k()));
  if (effective_steps > 0) {
    if (workers > 1 && ensemble.k() > 1) {
      std::vector<std::future<MemberResult>> futs;
      for (int m = 0; m < ensemble.k(); ++m) {
        futs.push_back(std::async(std::launch::async, [&, m] {
          return train_one_member(ensemble.members[static_cast<std::size_t>(m)],
                                  ensemble.adam_states[static_cast<std::size_t>(m)], ensemble, real_buffer,
                                  effective_steps, batch_size, current_epoch, bias,
                                  seeds[static_cast<std::size_t>(m)]);
        }));
      }
      for (int m = 0; m < ensemble.k(); ++m) results[static_cast<std::size_t>(m)] = futs[static_cast<std::size_t>(m)].get();
    } else {
      for (int m = 0; m < ensemble.k(); ++m) {
        results[static_cast<std::size_t>(m)] =
            train_one_member(ensemble.members[static_cast<std::size_t>(m)],
                             ensemble.adam_states[static_cast<std::size_t>(m)], ensemble, real_buffer,
                             effective_steps, batch_size, current_epoch, bias, seeds[static_cast<std::size_t>(m)]);
      }
    }
    ensemble.train_calls += 1;
  }

  ModelTrainReport report;
  report.steps_run = effective_steps;
  for (const MemberResult& r : results) {
    report.mean_loss_start += r.loss_start / ensemble.k();
    report.mean_loss_end += r.loss_end / ensemble.k();
  }
  return report;
}

std::vector<double> predict_next(const EnsembleModel& ensemble, int member_index, const std::vector<double>& state,
                                 const std::vector<double>& action) {
  if (member_index < 0 || member_index >= ensemble.k())
    throw std::invalid_argument("predict_next: member index " + std::to_string(member_index) + " out of range");
  const auto x = ensemble.input_norm.normalize(concat(state, action));
  const auto nd = forward(ensemble.members[static_cast<std::size_t>(member_index)], x);
  const auto delta = ensemble.delta_norm.denormalize(nd);
  std::vector<double> next(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) next[i] = state[i] + delta[i];
  return next;
}

std::vector<std::vector<double>> predict_all(const EnsembleModel& ensemble, const std::vector<double>& state,
                                             const std::vector<double>& action) {
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(ensemble.k()));
  for (int m = 0; m < ensemble.k(); ++m) out.push_back(predict_next(ensemble, m, state, action));
  return out;
}

std::vector<Matrix> member_outputs_normalized(const EnsembleModel& ensemble, const Matrix& states_actions) {
  Matrix X(states_actions.rows, states_actions.cols);
  for (int r = 0; r < states_actions.rows; ++r)
    X.set_row(r, ensemble.input_norm.normalize(states_actions.row_vec(r)));
  std::vector<Matrix> outs;
  outs.reserve(static_cast<std::size_t>(ensemble.k()));
  for (const Mlp& member : ensemble.members) outs.push_back(forward(member, X));
  return outs;
}

}  // namespace iher
