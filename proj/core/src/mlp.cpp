#include "iher/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "iher/rng.hpp"

namespace iher {

namespace {

void apply_activation(Activation act, Matrix& m) {
  switch (act) {
    case Activation::Identity:
      return;
    case Activation::Relu:
      for (double& v : m.data) v = v > 0.0 ? v : 0.0;
      return;
    case Activation::Tanh:
      for (double& v : m.data) v = std::tanh(v);
      return;
  }
}

// derivative expressed through preactivation z and activation a = act(z)
inline double activation_grad(Activation act, double z, double a) {
  switch (act) {
    case Activation::Identity:
      return 1.0;
    case Activation::Relu:
      return z > 0.0 ? 1.0 : 0.0;  // subgradient at 0 is 0
    case Activation::Tanh:
      return 1.0 - a * a;
  }
  return 1.0;
}

}  // namespace

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers) n += l.w.size() + l.b.size();
  return n;
}

Mlp make_mlp(const std::vector<int>& layer_sizes, Activation hidden, Activation output, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw std::invalid_argument("make_mlp: need at least input and output widths");
  for (int s : layer_sizes)
    if (s <= 0) throw std::invalid_argument("make_mlp: layer sizes must be positive");

  Mlp net;
  net.layer_sizes = layer_sizes;
  net.hidden_activation = hidden;
  net.output_activation = output;
  Rng rng = make_rng(seed);
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    Layer l;
    l.in = layer_sizes[i];
    l.out = layer_sizes[i + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    l.w.resize(static_cast<std::size_t>(l.in) * l.out);
    l.b.resize(l.out);
    for (double& v : l.w) v = dist(rng);
    for (double& v : l.b) v = dist(rng);
    net.layers.push_back(std::move(l));
  }
  return net;
}

Matrix forward(const Mlp& net, const Matrix& inputs, ForwardTrace* trace) {
  if (inputs.cols != net.input_dim())
    throw std::invalid_argument("forward: input has " + std::to_string(inputs.cols) + " columns, net expects " +
                                std::to_string(net.input_dim()));
  if (trace) {
    trace->input = inputs;
    trace->preacts.clear();
    trace->activations.clear();
  }

  Matrix cur = inputs;
  const int n_layers = static_cast<int>(net.layers.size());
  for (int li = 0; li < n_layers; ++li) {
    const Layer& l = net.layers[li];
    Matrix z(cur.rows, l.out);
    for (int s = 0; s < cur.rows; ++s) {
      double* zr = z.row(s);
      for (int o = 0; o < l.out; ++o) zr[o] = l.b[o];
      const double* xr = cur.row(s);
      for (int j = 0; j < l.in; ++j) {
        const double xj = xr[j];
        const double* wr = l.w.data() + static_cast<std::size_t>(j) * l.out;
        for (int o = 0; o < l.out; ++o) zr[o] += xj * wr[o];
      }
    }
    if (trace) trace->preacts.push_back(z);
    apply_activation(li + 1 == n_layers ? net.output_activation : net.hidden_activation, z);
    if (trace) trace->activations.push_back(z);
    cur = std::move(z);
  }
  return cur;
}

std::vector<double> forward(const Mlp& net, const std::vector<double>& input) {
  Matrix m(1, static_cast<int>(input.size()));
  m.set_row(0, input);
  return forward(net, m).row_vec(0);
}

BackwardResult backward(const Mlp& net, const ForwardTrace& trace, const Matrix& upstream) {
  const int n_layers = static_cast<int>(net.layers.size());
  if (static_cast<int>(trace.activations.size()) != n_layers)
    throw std::invalid_argument("backward: trace does not match network depth");
  if (upstream.rows != trace.input.rows || upstream.cols != net.output_dim())
    throw std::invalid_argument("backward: upstream gradient shape mismatch");

  const int batch = trace.input.rows;
  const double inv_batch = 1.0 / static_cast<double>(batch);

  BackwardResult result;
  result.param_grads.resize(n_layers);

  // delta starts as upstream * act'(z_last) and is propagated backwards
  Matrix delta = upstream;
  for (int li = n_layers - 1; li >= 0; --li) {
    const Layer& l = net.layers[li];
    const Activation act = li + 1 == n_layers ? net.output_activation : net.hidden_activation;
    const Matrix& z = trace.preacts[li];
    const Matrix& a = trace.activations[li];
    for (int s = 0; s < batch; ++s)
      for (int o = 0; o < l.out; ++o) delta(s, o) *= activation_grad(act, z(s, o), a(s, o));

    Layer& g = result.param_grads[li];
    g.in = l.in;
    g.out = l.out;
    g.w.assign(l.w.size(), 0.0);
    g.b.assign(l.b.size(), 0.0);
    const Matrix& below = li == 0 ? trace.input : trace.activations[li - 1];
    for (int s = 0; s < batch; ++s) {
      const double* xr = below.row(s);
      const double* dr = delta.row(s);
      for (int j = 0; j < l.in; ++j) {
        const double xj = xr[j];
        double* gw = g.w.data() + static_cast<std::size_t>(j) * l.out;
        for (int o = 0; o < l.out; ++o) gw[o] += xj * dr[o];
      }
      for (int o = 0; o < l.out; ++o) g.b[o] += dr[o];
    }
    for (double& v : g.w) v *= inv_batch;
    for (double& v : g.b) v *= inv_batch;

    // propagate: new_delta[s][j] = sum_o delta[s][o] * w[j][o]
    Matrix below_delta(batch, l.in);
    for (int s = 0; s < batch; ++s) {
      const double* dr = delta.row(s);
      double* nr = below_delta.row(s);
      for (int j = 0; j < l.in; ++j) {
        const double* wr = l.w.data() + static_cast<std::size_t>(j) * l.out;
        double acc = 0.0;
        for (int o = 0; o < l.out; ++o) acc += dr[o] * wr[o];
        nr[j] = acc;
      }
    }
    delta = std::move(below_delta);
  }
  result.input_grads = std::move(delta);
  return result;
}

BackwardResult backward(const Mlp& net, const Matrix& inputs, const Matrix& upstream) {
  ForwardTrace trace;
  forward(net, inputs, &trace);
  return backward(net, trace, upstream);
}

AdamState make_adam(const Mlp& net, double learning_rate) {
  if (learning_rate <= 0.0) throw std::invalid_argument("make_adam: learning rate must be positive");
  AdamState st;
  st.learning_rate = learning_rate;
  st.first_moment.resize(net.layers.size());
  st.second_moment.resize(net.layers.size());
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const Layer& l = net.layers[i];
    for (std::vector<Layer>* m : {&st.first_moment, &st.second_moment}) {
      Layer& ml = (*m)[i];
      ml.in = l.in;
      ml.out = l.out;
      ml.w.assign(l.w.size(), 0.0);
      ml.b.assign(l.b.size(), 0.0);
    }
  }
  return st;
}

void adam_update(Mlp& net, const std::vector<Layer>& grads, AdamState& state) {
  if (grads.size() != net.layers.size() || state.first_moment.size() != net.layers.size())
    throw std::invalid_argument("adam_update: layer count mismatch");

  for (std::size_t li = 0; li < grads.size(); ++li) {
    const Layer& g = grads[li];
    const Layer& l = net.layers[li];
    if (g.w.size() != l.w.size() || g.b.size() != l.b.size())
      throw std::invalid_argument("adam_update: gradient shape mismatch at layer " + std::to_string(li));
    for (double v : g.w)
      if (!std::isfinite(v)) throw std::runtime_error("adam_update: non-finite weight gradient at layer " + std::to_string(li));
    for (double v : g.b)
      if (!std::isfinite(v)) throw std::runtime_error("adam_update: non-finite bias gradient at layer " + std::to_string(li));
  }

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);

  auto update_span = [&](double* p, const double* g, double* m, double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  };

  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    Layer& l = net.layers[li];
    const Layer& g = grads[li];
    Layer& m = state.first_moment[li];
    Layer& v = state.second_moment[li];
    update_span(l.w.data(), g.w.data(), m.w.data(), v.w.data(), l.w.size());
    update_span(l.b.data(), g.b.data(), m.b.data(), v.b.data(), l.b.size());
  }
}

GradCheckReport gradient_check(const Mlp& net, const Matrix& inputs, double fd_step, std::uint64_t upstream_seed) {
  Rng rng = make_rng(mix_seed(upstream_seed, 0x67726164));
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix upstream(inputs.rows, net.output_dim());
  for (double& v : upstream.data) v = dist(rng);

  const double inv_batch = 1.0 / static_cast<double>(inputs.rows);
  auto loss = [&](const Mlp& n) {
    Matrix y = forward(n, inputs);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) acc += y.data[i] * upstream.data[i];
    return acc * inv_batch;
  };

  BackwardResult analytic = backward(net, inputs, upstream);

  GradCheckReport report;
  Mlp probe = net;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    auto check_span = [&](std::vector<double>& params, const std::vector<double>& grads) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + fd_step;
        const double lp = loss(probe);
        params[i] = saved - fd_step;
        const double lm = loss(probe);
        params[i] = saved;
        const double numeric = (lp - lm) / (2.0 * fd_step);
        const double analytic_g = grads[i];
        const double denom = std::max({1e-8, std::fabs(numeric), std::fabs(analytic_g)});
        const double rel = std::fabs(numeric - analytic_g) / denom;
        if (rel > report.max_rel_error) {
          report.max_rel_error = rel;
          report.worst_layer = static_cast<int>(li);
        }
        ++report.params_checked;
      }
    };
    check_span(probe.layers[li].w, analytic.param_grads[li].w);
    check_span(probe.layers[li].b, analytic.param_grads[li].b);
  }
  return report;
}

bool all_parameters_finite(const Mlp& net) {
  for (const Layer& l : net.layers) {
    for (double v : l.w)
      if (!std::isfinite(v)) return false;
    for (double v : l.b)
      if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace iher
