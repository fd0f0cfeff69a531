#include "coulomb/neural.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "coulomb/error.hpp"
#include "coulomb/simd/dispatch.hpp"

namespace coulomb {

std::string to_string(Activation act) {
  switch (act) {
    case Activation::Elu: return "elu";
    case Activation::Tanh: return "tanh";
    case Activation::Linear: return "linear";
  }
  return "unknown";
}

Activation parse_activation(const std::string& name) {
  if (name == "elu") return Activation::Elu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "linear") return Activation::Linear;
  throw InputError("unknown activation '" + name + "'");
}

double activate(Activation act, double x) {
  switch (act) {
    case Activation::Elu: return x > 0.0 ? x : std::expm1(x);
    case Activation::Tanh: return std::tanh(x);
    case Activation::Linear: return x;
  }
  return x;
}

double activation_slope(Activation act, double y) {
  switch (act) {
    case Activation::Elu: return y > 0.0 ? 1.0 : y + 1.0;
    case Activation::Tanh: return 1.0 - y * y;
    case Activation::Linear: return 1.0;
  }
  return 1.0;
}

Mlp::Mlp(std::vector<int> widths, std::vector<Activation> activations)
    : widths_(std::move(widths)), activations_(std::move(activations)) {
  if (widths_.size() < 2) throw InputError("an MLP needs at least input and output widths");
  if (activations_.size() != widths_.size() - 1)
    throw InputError("an MLP needs one activation per layer");
  for (int w : widths_)
    if (w < 1) throw InputError("layer widths must be >= 1");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(widths_[l + 1]) * (static_cast<std::size_t>(widths_[l]) + 1);
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::glorot(std::vector<int> widths, std::vector<Activation> activations, Rng& rng) {
  Mlp net(std::move(widths), std::move(activations));
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const double fan = static_cast<double>(net.widths_[l] + net.widths_[l + 1]);
    const double limit = std::sqrt(6.0 / fan);
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : net.weights(l)) w = dist(rng);
  }
  return net;
}

std::span<double> Mlp::weights(std::size_t layer) noexcept {
  return {params_.data() + offsets_[layer],
          static_cast<std::size_t>(widths_[layer + 1]) * static_cast<std::size_t>(widths_[layer])};
}

std::span<const double> Mlp::weights(std::size_t layer) const noexcept {
  return {params_.data() + offsets_[layer],
          static_cast<std::size_t>(widths_[layer + 1]) * static_cast<std::size_t>(widths_[layer])};
}

std::span<double> Mlp::biases(std::size_t layer) noexcept {
  const std::size_t n = static_cast<std::size_t>(widths_[layer + 1]);
  return {params_.data() + offsets_[layer] + n * static_cast<std::size_t>(widths_[layer]), n};
}

std::span<const double> Mlp::biases(std::size_t layer) const noexcept {
  const std::size_t n = static_cast<std::size_t>(widths_[layer + 1]);
  return {params_.data() + offsets_[layer] + n * static_cast<std::size_t>(widths_[layer]), n};
}

bool Mlp::all_finite() const noexcept {
  return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
}

Matrix forward(const Mlp& net, const Matrix& input, ForwardCache* cache) {
  if (net.layer_count() == 0) throw InputError("forward on an empty network");
  if (input.cols() != net.input_dim())
    throw InputError("network expects inputs of width " + std::to_string(net.input_dim()) +
                     ", got " + std::to_string(input.cols()));
  const auto& gemm = simd::table().gemm;
  const std::size_t batch = input.rows();
  if (cache != nullptr) {
    cache->outputs.clear();
    cache->outputs.push_back(input);
  }
  Matrix current = input;
  std::vector<double> transposed;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const std::size_t in = static_cast<std::size_t>(net.widths()[l]);
    const std::size_t out = static_cast<std::size_t>(net.widths()[l + 1]);
    const auto w = net.weights(l);
    const auto b = net.biases(l);
    transposed.resize(in * out);
    for (std::size_t o = 0; o < out; ++o)
      for (std::size_t i = 0; i < in; ++i) transposed[i * out + o] = w[o * in + i];

    Matrix next(batch, out);
    for (std::size_t r = 0; r < batch; ++r) std::copy(b.begin(), b.end(), next.row(r).begin());
    gemm(batch, out, in, current.data(), in, 1, transposed.data(), next.data(), 1);
    const Activation act = net.activations()[l];
    if (act != Activation::Linear)
      for (double& v : next.values()) v = activate(act, v);
    current = std::move(next);
    if (cache != nullptr) cache->outputs.push_back(current);
  }
  return current;
}

Point forward(const Mlp& net, std::span<const double> input) {
  Matrix in;
  in.append_row(input);
  const Matrix out = forward(net, in);
  return Point(out.values().begin(), out.values().end());
}

Gradients backward(const Mlp& net, const ForwardCache& cache, const Matrix& output_grad,
                   bool want_parameter_grads) {
  const std::size_t layers = net.layer_count();
  if (cache.outputs.size() != layers + 1) throw InputError("forward cache does not match the network");
  const std::size_t batch = cache.outputs.front().rows();
  if (output_grad.rows() != batch || output_grad.cols() != net.output_dim())
    throw InputError("output gradient has the wrong shape");
  const auto& gemm = simd::table().gemm;

  Gradients grads;
  if (want_parameter_grads) grads.parameters.assign(net.parameter_count(), 0.0);
  Matrix upstream = output_grad;
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = static_cast<std::size_t>(net.widths()[l]);
    const std::size_t out = static_cast<std::size_t>(net.widths()[l + 1]);
    const Matrix& y = cache.outputs[l + 1];
    const Activation act = net.activations()[l];
    Matrix delta = std::move(upstream);
    if (act != Activation::Linear) {
      auto dv = delta.values();
      const auto yv = y.values();
      for (std::size_t i = 0; i < dv.size(); ++i) dv[i] *= activation_slope(act, yv[i]);
    }
    if (want_parameter_grads) {
      const std::size_t offset = static_cast<std::size_t>(net.weights(l).data() - net.parameters().data());
      double* dw = grads.parameters.data() + offset;
      gemm(out, in, batch, delta.data(), 1, out, cache.outputs[l].data(), dw, 0);
      double* db = dw + out * in;
      for (std::size_t r = 0; r < batch; ++r)
        for (std::size_t o = 0; o < out; ++o) db[o] += delta(r, o);
    }
    Matrix below(batch, in);
    gemm(batch, in, out, delta.data(), out, 1, net.weights(l).data(), below.data(), 0);
    upstream = std::move(below);
  }
  grads.input = std::move(upstream);
  return grads;
}

AdamState AdamState::for_parameters(std::size_t count, double learning_rate, double weight_decay) {
  AdamState s;
  s.first_moment.assign(count, 0.0);
  s.second_moment.assign(count, 0.0);
  s.learning_rate = learning_rate;
  s.weight_decay = weight_decay;
  return s;
}

bool AdamState::all_finite() const noexcept {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(first_moment.begin(), first_moment.end(), finite) &&
         std::all_of(second_moment.begin(), second_moment.end(), finite);
}

void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state) {
  if (grads.size() != params.size()) throw InputError("gradient and parameter counts differ");
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size())
    throw InputError("Adam state does not match the parameter count");
  ++state.step_counter;
  const double t = static_cast<double>(state.step_counter);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + state.weight_decay * params[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon_opt);
  }
}

}  // namespace coulomb
