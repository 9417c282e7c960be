#pragma once

#include <vector>

#include "iher/dynamics.hpp"
#include "iher/replay.hpp"

namespace iher {

struct CuriosityConfig {
  double scale = 0.5;      // nu
  double clip = 0.8;       // eta, upper bound on the bonus
  bool raw_space = false;  // variance over denormalized next states instead of normalized deltas
};

// Mean over state dimensions of the population variance across the k members'
// predictions. Computed in normalized-delta space unless raw_space is set.
// Throws if the ensemble has never been trained.
double ensemble_variance(const EnsembleModel& ensemble, const std::vector<double>& state,
                         const std::vector<double>& action, bool raw_space = false);

// clip(scale * sigma, 0, clip)
double intrinsic_reward(double sigma, const CuriosityConfig& config);

// Adds the disagreement bonus of the CURRENT ensemble to every transition's
// training reward (real and imaginary alike). Returns the per-transition
// intrinsic rewards. Buffers are never touched; bonuses live only in the batch.
std::vector<double> augment_batch_rewards(std::vector<SampledTransition>& batch, const EnsembleModel& ensemble,
                                          const CuriosityConfig& config);

}  // namespace iher
