#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "coulomb/matrix.hpp"
#include "coulomb/rng.hpp"

namespace coulomb {

enum class Activation { Elu, Tanh, Linear };

std::string to_string(Activation act);
Activation parse_activation(const std::string& name);

// ELU uses alpha = 1.
double activate(Activation act, double x);
// Derivative expressed through the activation output y = activate(act, x).
double activation_slope(Activation act, double y);

// Fully connected feed-forward network. Parameters live in one flat buffer,
// layer by layer: weights (out x in, row-major) then biases (out).
class Mlp {
 public:
  Mlp() = default;
  // Zero-initialized parameters. activations.size() == widths.size() - 1.
  Mlp(std::vector<int> widths, std::vector<Activation> activations);

  // Uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static Mlp glorot(std::vector<int> widths, std::vector<Activation> activations, Rng& rng);

  const std::vector<int>& widths() const noexcept { return widths_; }
  const std::vector<Activation>& activations() const noexcept { return activations_; }
  std::size_t layer_count() const noexcept { return activations_.size(); }
  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(widths_.front()); }
  std::size_t output_dim() const noexcept { return static_cast<std::size_t>(widths_.back()); }

  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  std::span<double> weights(std::size_t layer) noexcept;
  std::span<const double> weights(std::size_t layer) const noexcept;
  std::span<double> biases(std::size_t layer) noexcept;
  std::span<const double> biases(std::size_t layer) const noexcept;

  bool all_finite() const noexcept;

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<int> widths_;
  std::vector<Activation> activations_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;  // start of each layer's weights
};

// outputs[0] is the input batch; outputs[l + 1] the output of layer l.
struct ForwardCache {
  std::vector<Matrix> outputs;
};

// Batched forward pass over the rows of `input`.
Matrix forward(const Mlp& net, const Matrix& input, ForwardCache* cache = nullptr);
Point forward(const Mlp& net, std::span<const double> input);

struct Gradients {
  std::vector<double> parameters;  // same layout as Mlp::parameters(); empty if not requested
  Matrix input;                    // d loss / d input, one row per batch row
};

// Reverse pass for a scalar loss whose gradient with respect to the network
// output is `output_grad` (batch x output_dim).
Gradients backward(const Mlp& net, const ForwardCache& cache, const Matrix& output_grad,
                   bool want_parameter_grads = true);

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  long step_counter = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon_opt = 1e-8;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;

  static AdamState for_parameters(std::size_t count, double learning_rate, double weight_decay = 0.0);
  bool all_finite() const noexcept;
};

// Classic L2 form: g' = g + weight_decay * p, then bias-corrected Adam on g'.
void adam_update(std::span<double> params, std::span<const double> grads, AdamState& state);

}  // namespace coulomb
