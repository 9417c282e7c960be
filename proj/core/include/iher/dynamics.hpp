#pragma once

#include <cstdint>
#include <vector>

#include "iher/matrix.hpp"
#include "iher/mlp.hpp"
#include "iher/replay.hpp"
#include "iher/rng.hpp"

namespace iher {

// Per-dimension shift/scale with the std floored at 1e-6.
struct Normalizer {
  std::vector<double> mean;
  std::vector<double> stdev;

  static Normalizer identity(int dim);

  std::vector<double> normalize(const std::vector<double>& x) const;
  std::vector<double> denormalize(const std::vector<double>& x) const;
  int dim() const { return static_cast<int>(mean.size()); }
};

// k delta-predicting one-step models over concat(state, action), sharing
// normalization statistics but with independently seeded parameters.
struct EnsembleModel {
  int state_dim = 0;
  int action_dim = 0;
  std::vector<Mlp> members;
  std::vector<AdamState> adam_states;
  Normalizer input_norm;  // over concat(state, action)
  Normalizer delta_norm;  // over next_state - state
  int train_calls = 0;

  int k() const { return static_cast<int>(members.size()); }
  bool trained() const { return train_calls > 0; }
};

EnsembleModel make_ensemble(int k, int state_dim, int action_dim, const std::vector<int>& hidden_sizes,
                            double learning_rate, std::uint64_t seed);

struct ModelTrainReport {
  long steps_run = 0;
  double mean_loss_start = 0.0;
  double mean_loss_end = 0.0;
};

// K gradient steps per member (5K on the very first training call) on
// recency-biased batches drawn independently per member. Refits both
// normalizers from the full buffer before training. workers > 1 trains
// members concurrently; results are identical either way.
ModelTrainReport train_models(EnsembleModel& ensemble, const EpisodeBuffer& real_buffer, long steps,
                              int batch_size, int current_epoch, double bias, Rng& rng, int workers = 1);

// next_state = state + denormalize(member(normalize(state, action))); pure.
std::vector<double> predict_next(const EnsembleModel& ensemble, int member_index,
                                 const std::vector<double>& state, const std::vector<double>& action);

std::vector<std::vector<double>> predict_all(const EnsembleModel& ensemble, const std::vector<double>& state,
                                             const std::vector<double>& action);

// Normalized-delta predictions of every member for a batch of rows, each row
// being an unnormalized concat(state, action). Row-for-row identical to the
// single-sample path.
std::vector<Matrix> member_outputs_normalized(const EnsembleModel& ensemble, const Matrix& states_actions);

}  // namespace iher
