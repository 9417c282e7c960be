#include "iher/curiosity.hpp"

#include <algorithm>
#include <stdexcept>

namespace iher {

namespace {

// population variance per dimension across member predictions, averaged over dimensions
double mean_variance(const std::vector<const double*>& rows, int dim) {
  const double k = static_cast<double>(rows.size());
  double acc = 0.0;
  for (int d = 0; d < dim; ++d) {
    bool all_equal = true;
    for (const double* r : rows) all_equal = all_equal && r[d] == rows.front()[d];
    if (all_equal) continue;  // exactly zero, immune to mean rounding
    double mean = 0.0;
    for (const double* r : rows) mean += r[d];
    mean /= k;
    double var = 0.0;
    for (const double* r : rows) {
      const double diff = r[d] - mean;
      var += diff * diff;
    }
    acc += var / k;
  }
  return acc / dim;
}

}  // namespace

double ensemble_variance(const EnsembleModel& ensemble, const std::vector<double>& state,
                         const std::vector<double>& action, bool raw_space) {
  if (!ensemble.trained()) throw std::runtime_error("ensemble_variance: ensemble has not been trained");
  std::vector<std::vector<double>> preds;
  preds.reserve(static_cast<std::size_t>(ensemble.k()));
  if (raw_space) {
    for (int m = 0; m < ensemble.k(); ++m) preds.push_back(predict_next(ensemble, m, state, action));
  } else {
    std::vector<double> x = state;
    x.insert(x.end(), action.begin(), action.end());
    const auto nx = ensemble.input_norm.normalize(x);
    for (const Mlp& member : ensemble.members) preds.push_back(forward(member, nx));
  }
  std::vector<const double*> rows;
  for (const auto& p : preds) rows.push_back(p.data());
  return mean_variance(rows, static_cast<int>(preds.front().size()));
}

double intrinsic_reward(double sigma, const CuriosityConfig& config) {
  if (config.clip <= 0.0) throw std::invalid_argument("intrinsic_reward: clip must be positive");
  return std::clamp(config.scale * sigma, 0.0, config.clip);
}

std::vector<double> augment_batch_rewards(std::vector<SampledTransition>& batch, const EnsembleModel& ensemble,
                                          const CuriosityConfig& config) {
  if (!ensemble.trained()) throw std::runtime_error("augment_batch_rewards: ensemble has not been trained");
  const int n = static_cast<int>(batch.size());
  std::vector<double> bonuses(static_cast<std::size_t>(n), 0.0);
  if (n == 0) return bonuses;

  const int in_dim = ensemble.state_dim + ensemble.action_dim;
  Matrix X(n, in_dim);
  for (int i = 0; i < n; ++i) {
    const Transition& t = batch[static_cast<std::size_t>(i)].t;
    for (int d = 0; d < ensemble.state_dim; ++d) X(i, d) = t.obs.observation[static_cast<std::size_t>(d)];
    for (int d = 0; d < ensemble.action_dim; ++d)
      X(i, ensemble.state_dim + d) = t.action[static_cast<std::size_t>(d)];
  }

  std::vector<Matrix> outs;
  if (config.raw_space) {
    // raw next states: state + denormalized member deltas
    outs = member_outputs_normalized(ensemble, X);
    for (Matrix& o : outs) {
      for (int i = 0; i < n; ++i) {
        const auto delta = ensemble.delta_norm.denormalize(o.row_vec(i));
        const Transition& t = batch[static_cast<std::size_t>(i)].t;
        for (int d = 0; d < ensemble.state_dim; ++d)
          o(i, d) = t.obs.observation[static_cast<std::size_t>(d)] + delta[static_cast<std::size_t>(d)];
      }
    }
  } else {
    outs = member_outputs_normalized(ensemble, X);
  }

  for (int i = 0; i < n; ++i) {
    std::vector<const double*> rows;
    rows.reserve(outs.size());
    for (const Matrix& o : outs) rows.push_back(o.row(i));
    const double sigma = mean_variance(rows, ensemble.state_dim);
    const double bonus = intrinsic_reward(sigma, config);
    bonuses[static_cast<std::size_t>(i)] = bonus;
    batch[static_cast<std::size_t>(i)].training_reward += bonus;
  }
  return bonuses;
}

}  // namespace iher
