#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "coulomb/error.hpp"
#include "coulomb/field.hpp"
#include "coulomb/kernel.hpp"
#include "coulomb/matrix.hpp"
#include "coulomb/mixture.hpp"
#include "coulomb/neural.hpp"
#include "coulomb/rng.hpp"
#include "json.hpp"

namespace coulomb {

struct TrainConfig {
  std::size_t batch_real = 128;  // N_y
  std::size_t batch_gen = 128;   // N_x
  KernelSpec kernel = KernelSpec::plummer(3.0, 3.0);
  double lr_discriminator = 0.01;
  double lr_generator = 0.01;
  // Per-step multiplicative learning-rate factor. Values <= 0 are resolved to
  // final_lr_fraction^(1 / total_steps).
  double lr_decay = 0.0;
  long total_steps = 10000;
  int z_dim = 4;
  // Std of the Gaussian noise added to discriminator evaluation locations.
  double gaussian_ball_sigma = 0.0;
  std::uint64_t seed = 0;
  long eval_every = 1000;

  std::vector<int> generator_hidden{128, 128};
  std::vector<int> discriminator_hidden{128, 128};
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double weight_decay = 0.0;
  double final_lr_fraction = 0.01;
  // Per-step multiplicative factor on the kernel epsilon. Values <= 0 are
  // resolved to final_epsilon_fraction^(1 / total_steps).
  double epsilon_decay = 0.0;
  double final_epsilon_fraction = 1.0;
  std::size_t eval_samples = 2000;
  MixtureSpec target = grid_mixture_25();
  // Size of the fixed training set drawn from `target`; 0 draws fresh points
  // for every batch.
  std::size_t dataset_size = 100000;

  // Fills derived fields (lr_decay) and validates.
  void resolve();
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
// Missing fields keep their defaults. "target" may be "grid25" or an object
// {centers, component_std, weights}.
TrainConfig train_config_from_json(const nlohmann::json& doc);

class DataSampler {
 public:
  virtual ~DataSampler() = default;
  virtual Matrix draw(std::size_t n, Rng& rng) = 0;
  virtual std::size_t dim() const = 0;
};

class MixtureSampler final : public DataSampler {
 public:
  explicit MixtureSampler(MixtureSpec spec);
  Matrix draw(std::size_t n, Rng& rng) override;
  std::size_t dim() const override { return spec_.dim(); }

 private:
  MixtureSpec spec_;
};

// Draws rows of a fixed point set, uniformly with replacement, or as one
// shuffled pass without replacement that throws DataError once exhausted.
class DatasetSampler final : public DataSampler {
 public:
  DatasetSampler(Matrix points, bool with_replacement);
  Matrix draw(std::size_t n, Rng& rng) override;
  std::size_t dim() const override { return points_.cols(); }

 private:
  Matrix points_;
  bool with_replacement_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

// Sampler for config.target honoring config.dataset_size.
std::unique_ptr<DataSampler> make_target_sampler(const TrainConfig& config);

struct MetricRow {
  long step = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double energy = 0.0;
  int modes_covered = 0;
  double high_quality_fraction = 0.0;
};

struct TrainState {
  Mlp generator;
  Mlp discriminator;
  AdamState generator_opt;
  AdamState discriminator_opt;
  long step = 0;
  KernelSpec kernel;  // current kernel; epsilon shrinks by epsilon_decay per step
  Rng data_rng;
  Rng latent_rng;
  Rng ball_rng;
  Rng eval_rng;
  std::vector<MetricRow> metric_log;
};

// Fresh networks (Glorot init from their own streams) and optimizer state.
TrainState init_train_state(const TrainConfig& config, std::size_t data_dim);

class TrainingDiverged : public DivergenceError {
 public:
  TrainingDiverged(const std::string& what, std::shared_ptr<const TrainState> last_good)
      : DivergenceError(what), last_good_(std::move(last_good)) {}
  // State at the last successful evaluation point (null if none).
  const std::shared_ptr<const TrainState>& last_good() const noexcept { return last_good_; }

 private:
  std::shared_ptr<const TrainState> last_good_;
};

Matrix sample_latent(Rng& rng, std::size_t n, int z_dim);
Matrix sample_generator(const Mlp& generator, std::size_t n, Rng& rng);

struct TrainBatch {
  Batch batch;              // charges: Y real, X = G(z)
  Matrix evaluation_points;  // X rows then Y rows, plus ball noise if enabled
};

TrainBatch make_batch(TrainState& state, const TrainConfig& config, DataSampler& data);

// Potential of the batch at each evaluation point. Depends only on the
// realized batch values.
std::vector<double> discriminator_targets(const TrainBatch& batch, const KernelSpec& kernel);

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // parameter layout of the trained network
};

// 1/2 mean_j (pred_j - target_j)^2 and its gradient w.r.t. pred.
double regression_loss(std::span<const double> predictions, std::span<const double> targets,
                       std::span<double> prediction_grad);

LossGradient discriminator_loss_and_grad(const Mlp& discriminator, const TrainBatch& batch,
                                         std::span<const double> targets);
// -1/2 mean_i D(G(z_i)); gradient w.r.t. the generator parameters only.
LossGradient generator_loss_and_grad(const Mlp& generator, const Mlp& discriminator,
                                     const Matrix& z);

// One Adam update each. Throw TrainingDiverged on non-finite values. The
// discriminator regresses the potential under state.kernel.
double discriminator_step(TrainState& state, const TrainBatch& batch);
double generator_step(TrainState& state, const Matrix& z);

struct TrainHooks {
  // Called after every logged step with the evaluation samples used for it.
  std::function<void(const TrainState&, const MetricRow&, const Matrix&)> on_eval;
};

// Alternates discriminator and generator updates on fresh batches until
// total_steps, decaying both learning rates and the kernel epsilon every step.
TrainState train(TrainConfig config, DataSampler& data, const TrainHooks& hooks = {});

}  // namespace coulomb
