#pragma once

#include <cstdint>
#include <vector>

#include "iher/matrix.hpp"

namespace iher {

enum class Activation { Relu, Tanh, Identity };

// One dense layer. Weights are stored transposed, (in x out) row-major, so the
// forward kernel accumulates y[o] over ascending j with a contiguous inner loop.
struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // w[j * out + o]
  std::vector<double> b;  // b[o]
};

struct Mlp {
  std::vector<int> layer_sizes;
  Activation hidden_activation = Activation::Relu;
  Activation output_activation = Activation::Identity;
  std::vector<Layer> layers;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  std::size_t parameter_count() const;
};

// Weights and biases uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], deterministic per seed.
Mlp make_mlp(const std::vector<int>& layer_sizes, Activation hidden, Activation output, std::uint64_t seed);

// Per-layer activations recorded by forward for reuse in backward.
struct ForwardTrace {
  Matrix input;
  std::vector<Matrix> preacts;      // z_l, one per layer
  std::vector<Matrix> activations;  // a_l = act(z_l), one per layer
};

// Batched forward pass; inputs is (batch x input_dim). Throws std::invalid_argument on
// dimension mismatch. If trace is non-null it is filled for a later backward call.
Matrix forward(const Mlp& net, const Matrix& inputs, ForwardTrace* trace = nullptr);
std::vector<double> forward(const Mlp& net, const std::vector<double>& input);

// Gradient of mean_batch( output . upstream ) w.r.t. parameters, and of
// sum_batch( output . upstream ) w.r.t. each input element (per-sample rows).
struct BackwardResult {
  std::vector<Layer> param_grads;  // shapes match net.layers
  Matrix input_grads;              // (batch x input_dim)
};

BackwardResult backward(const Mlp& net, const ForwardTrace& trace, const Matrix& upstream);
BackwardResult backward(const Mlp& net, const Matrix& inputs, const Matrix& upstream);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step_count = 0;
  std::vector<Layer> first_moment;
  std::vector<Layer> second_moment;
};

AdamState make_adam(const Mlp& net, double learning_rate);

// Standard bias-corrected Adam step. Throws std::runtime_error naming the layer if a
// gradient is non-finite, and std::invalid_argument on shape mismatch.
void adam_update(Mlp& net, const std::vector<Layer>& grads, AdamState& state);

struct GradCheckReport {
  double max_rel_error = 0.0;
  int worst_layer = -1;
  long params_checked = 0;
};

// Central finite differences over every parameter against backward.
GradCheckReport gradient_check(const Mlp& net, const Matrix& inputs, double fd_step = 1e-5,
                               std::uint64_t upstream_seed = 0);

bool all_parameters_finite(const Mlp& net);

}  // namespace iher
