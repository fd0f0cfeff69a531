#include "coulomb/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "coulomb/io.hpp"

namespace coulomb {

using nlohmann::json;

void TrainConfig::resolve() {
  if (lr_decay <= 0.0 && total_steps >= 1 && final_lr_fraction > 0.0)
    lr_decay = std::pow(final_lr_fraction, 1.0 / static_cast<double>(total_steps));
  if (epsilon_decay <= 0.0 && total_steps >= 1 && final_epsilon_fraction > 0.0)
    epsilon_decay = std::pow(final_epsilon_fraction, 1.0 / static_cast<double>(total_steps));
  validate();
}

void TrainConfig::validate() const {
  if (batch_real < 1 || batch_gen < 1) throw InputError("batch sizes must be >= 1");
  if (total_steps < 1) throw InputError("total_steps must be >= 1");
  if (!(lr_discriminator > 0.0) || !(lr_generator > 0.0)) throw InputError("learning rates must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw InputError("lr_decay must lie in (0, 1]");
  if (z_dim < 1) throw InputError("z_dim must be >= 1");
  if (!(gaussian_ball_sigma >= 0.0)) throw InputError("gaussian_ball_sigma must be >= 0");
  if (eval_every < 1) throw InputError("eval_every must be >= 1");
  if (eval_samples < 1) throw InputError("eval_samples must be >= 1");
  if (!(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0))
    throw InputError("final_lr_fraction must lie in (0, 1]");
  if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0)) throw InputError("epsilon_decay must lie in (0, 1]");
  if (!(final_epsilon_fraction > 0.0 && final_epsilon_fraction <= 1.0))
    throw InputError("final_epsilon_fraction must lie in (0, 1]");
  if (!(weight_decay >= 0.0)) throw InputError("weight_decay must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw InputError("Adam betas must lie in [0, 1)");
  for (int w : generator_hidden)
    if (w < 1) throw InputError("generator hidden widths must be >= 1");
  for (int w : discriminator_hidden)
    if (w < 1) throw InputError("discriminator hidden widths must be >= 1");
  kernel.validate();
  target.validate();
}

json to_json(const TrainConfig& c) {
  return {
      {"batch_real", c.batch_real},
      {"batch_gen", c.batch_gen},
      {"kernel", kernel_to_json(c.kernel)},
      {"lr_discriminator", c.lr_discriminator},
      {"lr_generator", c.lr_generator},
      {"lr_decay", c.lr_decay},
      {"total_steps", c.total_steps},
      {"z_dim", c.z_dim},
      {"gaussian_ball_sigma", c.gaussian_ball_sigma},
      {"seed", c.seed},
      {"eval_every", c.eval_every},
      {"generator_hidden", c.generator_hidden},
      {"discriminator_hidden", c.discriminator_hidden},
      {"adam_beta1", c.adam_beta1},
      {"adam_beta2", c.adam_beta2},
      {"weight_decay", c.weight_decay},
      {"final_lr_fraction", c.final_lr_fraction},
      {"epsilon_decay", c.epsilon_decay},
      {"final_epsilon_fraction", c.final_epsilon_fraction},
      {"eval_samples", c.eval_samples},
      {"target", mixture_to_json(c.target)},
      {"dataset_size", c.dataset_size},
  };
}

TrainConfig train_config_from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("training config must be a JSON object");
  reject_unknown_keys(doc,
                      {"batch_real", "batch_gen", "kernel", "lr_discriminator", "lr_generator",
                       "lr_decay", "total_steps", "z_dim", "gaussian_ball_sigma", "seed",
                       "eval_every", "generator_hidden", "discriminator_hidden", "adam_beta1",
                       "adam_beta2", "weight_decay", "final_lr_fraction", "epsilon_decay",
                       "final_epsilon_fraction", "eval_samples", "target",
                       "dataset_size"},
                      "training config");
  TrainConfig c;
  try {
    auto get = [&](const char* key, auto& field) {
      if (doc.contains(key)) field = doc.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("batch_real", c.batch_real);
    get("batch_gen", c.batch_gen);
    if (doc.contains("kernel")) c.kernel = kernel_from_json(doc.at("kernel"));
    get("lr_discriminator", c.lr_discriminator);
    get("lr_generator", c.lr_generator);
    get("lr_decay", c.lr_decay);
    get("total_steps", c.total_steps);
    get("z_dim", c.z_dim);
    get("gaussian_ball_sigma", c.gaussian_ball_sigma);
    get("seed", c.seed);
    get("eval_every", c.eval_every);
    get("generator_hidden", c.generator_hidden);
    get("discriminator_hidden", c.discriminator_hidden);
    get("adam_beta1", c.adam_beta1);
    get("adam_beta2", c.adam_beta2);
    get("weight_decay", c.weight_decay);
    get("final_lr_fraction", c.final_lr_fraction);
    get("epsilon_decay", c.epsilon_decay);
    get("final_epsilon_fraction", c.final_epsilon_fraction);
    get("eval_samples", c.eval_samples);
    if (doc.contains("target")) c.target = mixture_from_json(doc.at("target"));
    get("dataset_size", c.dataset_size);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed training config: ") + e.what());
  }
  return c;
}

MixtureSampler::MixtureSampler(MixtureSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

Matrix MixtureSampler::draw(std::size_t n, Rng& rng) { return sample_mixture(spec_, n, rng); }

DatasetSampler::DatasetSampler(Matrix points, bool with_replacement)
    : points_(std::move(points)), with_replacement_(with_replacement) {
  if (points_.rows() == 0) throw DataError("dataset sampler needs at least one point");
}

Matrix DatasetSampler::draw(std::size_t n, Rng& rng) {
  Matrix out(n, points_.cols());
  if (with_replacement_) {
    std::uniform_int_distribution<std::size_t> pick(0, points_.rows() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto src = points_.row(pick(rng));
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }
  if (order_.empty()) {
    order_.resize(points_.rows());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::shuffle(order_.begin(), order_.end(), rng);
  }
  if (cursor_ + n > order_.size())
    throw DataError("dataset exhausted: requested " + std::to_string(n) + " samples, " +
                    std::to_string(order_.size() - cursor_) + " left");
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = points_.row(order_[cursor_++]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

std::unique_ptr<DataSampler> make_target_sampler(const TrainConfig& config) {
  if (config.dataset_size == 0) return std::make_unique<MixtureSampler>(config.target);
  Rng rng = make_rng(config.seed, Stream::Reference);
  return std::make_unique<DatasetSampler>(sample_mixture(config.target, config.dataset_size, rng), true);
}

namespace {

std::vector<int> widths_of(int input, const std::vector<int>& hidden, int output) {
  std::vector<int> w{input};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(output);
  return w;
}

std::vector<Activation> hidden_elu_linear_out(std::size_t hidden_layers) {
  std::vector<Activation> acts(hidden_layers, Activation::Elu);
  acts.push_back(Activation::Linear);
  return acts;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

TrainState init_train_state(const TrainConfig& config, std::size_t data_dim) {
  config.validate();
  const int m = static_cast<int>(data_dim);
  Rng g_init = make_rng(config.seed, Stream::GeneratorInit);
  Rng d_init = make_rng(config.seed, Stream::DiscriminatorInit);
  TrainState s;
  s.kernel = config.kernel;
  s.generator = Mlp::glorot(widths_of(config.z_dim, config.generator_hidden, m),
                            hidden_elu_linear_out(config.generator_hidden.size()), g_init);
  s.discriminator = Mlp::glorot(widths_of(m, config.discriminator_hidden, 1),
                                hidden_elu_linear_out(config.discriminator_hidden.size()), d_init);
  s.generator_opt = AdamState::for_parameters(s.generator.parameter_count(), config.lr_generator,
                                              config.weight_decay);
  s.discriminator_opt = AdamState::for_parameters(s.discriminator.parameter_count(),
                                                  config.lr_discriminator, config.weight_decay);
  for (AdamState* opt : {&s.generator_opt, &s.discriminator_opt}) {
    opt->beta1 = config.adam_beta1;
    opt->beta2 = config.adam_beta2;
  }
  s.data_rng = make_rng(config.seed, Stream::Data);
  s.latent_rng = make_rng(config.seed, Stream::Latent);
  s.ball_rng = make_rng(config.seed, Stream::BallNoise);
  s.eval_rng = make_rng(config.seed, Stream::Eval);
  return s;
}

Matrix sample_latent(Rng& rng, std::size_t n, int z_dim) {
  Matrix z(n, static_cast<std::size_t>(z_dim));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : z.values()) v = normal(rng);
  return z;
}

Matrix sample_generator(const Mlp& generator, std::size_t n, Rng& rng) {
  return forward(generator, sample_latent(rng, n, static_cast<int>(generator.input_dim())));
}

TrainBatch make_batch(TrainState& state, const TrainConfig& config, DataSampler& data) {
  TrainBatch tb;
  tb.batch.real = data.draw(config.batch_real, state.data_rng);
  if (tb.batch.real.rows() != config.batch_real) throw DataError("data sampler returned too few samples");
  tb.batch.generated = forward(state.generator, sample_latent(state.latent_rng, config.batch_gen, config.z_dim));
  tb.batch.validate();
  tb.evaluation_points = tb.batch.generated.stacked(tb.batch.real);
  if (config.gaussian_ball_sigma > 0.0) {
    std::normal_distribution<double> normal(0.0, config.gaussian_ball_sigma);
    for (double& v : tb.evaluation_points.values()) v += normal(state.ball_rng);
  }
  return tb;
}

std::vector<double> discriminator_targets(const TrainBatch& batch, const KernelSpec& kernel) {
  return potential_hat_many(batch.evaluation_points, batch.batch, kernel);
}

double regression_loss(std::span<const double> predictions, std::span<const double> targets,
                       std::span<double> prediction_grad) {
  if (predictions.size() != targets.size() || prediction_grad.size() != predictions.size())
    throw InputError("regression loss needs matching prediction and target counts");
  if (predictions.empty()) throw InputError("regression loss on an empty set");
  const double n = static_cast<double>(predictions.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < predictions.size(); ++j) {
    const double r = predictions[j] - targets[j];
    sum += r * r;
    prediction_grad[j] = r / n;
  }
  return 0.5 * sum / n;
}

LossGradient discriminator_loss_and_grad(const Mlp& discriminator, const TrainBatch& batch,
                                         std::span<const double> targets) {
  ForwardCache cache;
  const Matrix pred = forward(discriminator, batch.evaluation_points, &cache);
  Matrix out_grad(pred.rows(), 1);
  LossGradient lg;
  lg.loss = regression_loss(pred.values(), targets, out_grad.values());
  lg.gradient = backward(discriminator, cache, out_grad).parameters;
  return lg;
}

LossGradient generator_loss_and_grad(const Mlp& generator, const Mlp& discriminator, const Matrix& z) {
  ForwardCache g_cache;
  const Matrix x = forward(generator, z, &g_cache);
  ForwardCache d_cache;
  const Matrix d_out = forward(discriminator, x, &d_cache);
  const double n = static_cast<double>(z.rows());
  LossGradient lg;
  double sum = 0.0;
  for (double v : d_out.values()) sum += v;
  lg.loss = -0.5 * sum / n;
  Matrix out_grad(d_out.rows(), 1, -0.5 / n);
  // Discriminator weights are frozen here: only the input gradient is needed.
  const Gradients through_d = backward(discriminator, d_cache, out_grad, false);
  lg.gradient = backward(generator, g_cache, through_d.input).parameters;
  return lg;
}

namespace {

std::shared_ptr<const TrainState> g_no_state;

[[noreturn]] void diverged(const std::string& what, long step,
                           const std::shared_ptr<const TrainState>& last_good) {
  throw TrainingDiverged("training diverged at step " + std::to_string(step) + ": " + what, last_good);
}

double discriminator_step_impl(TrainState& state, const TrainBatch& batch,
                               const std::shared_ptr<const TrainState>& last_good) {
  const auto targets = discriminator_targets(batch, state.kernel);
  LossGradient lg = discriminator_loss_and_grad(state.discriminator, batch, targets);
  if (!std::isfinite(lg.loss) || !all_finite(lg.gradient))
    diverged("non-finite discriminator loss", state.step + 1, last_good);
  adam_update(state.discriminator.parameters(), lg.gradient, state.discriminator_opt);
  if (!state.discriminator.all_finite())
    diverged("non-finite discriminator parameters", state.step + 1, last_good);
  return lg.loss;
}

double generator_step_impl(TrainState& state, const Matrix& z,
                           const std::shared_ptr<const TrainState>& last_good) {
  LossGradient lg = generator_loss_and_grad(state.generator, state.discriminator, z);
  if (!std::isfinite(lg.loss) || !all_finite(lg.gradient))
    diverged("non-finite generator loss", state.step + 1, last_good);
  adam_update(state.generator.parameters(), lg.gradient, state.generator_opt);
  if (!state.generator.all_finite())
    diverged("non-finite generator parameters", state.step + 1, last_good);
  return lg.loss;
}

}  // namespace

double discriminator_step(TrainState& state, const TrainBatch& batch) {
  return discriminator_step_impl(state, batch, g_no_state);
}

double generator_step(TrainState& state, const Matrix& z) {
  return generator_step_impl(state, z, g_no_state);
}

TrainState train(TrainConfig config, DataSampler& data, const TrainHooks& hooks) {
  config.resolve();
  if (data.dim() != config.target.dim())
    throw InputError("data sampler dimension does not match the target mixture");
  TrainState state = init_train_state(config, data.dim());
  std::shared_ptr<const TrainState> last_good;

  while (state.step < config.total_steps) {
    const TrainBatch batch = make_batch(state, config, data);
    const KernelSpec step_kernel = state.kernel;
    const double d_loss = discriminator_step_impl(state, batch, last_good);
    const Matrix z = sample_latent(state.latent_rng, config.batch_gen, config.z_dim);
    const double g_loss = generator_step_impl(state, z, last_good);
    ++state.step;
    state.discriminator_opt.learning_rate *= config.lr_decay;
    state.generator_opt.learning_rate *= config.lr_decay;
    state.kernel.epsilon *= config.epsilon_decay;

    if (state.step % config.eval_every == 0 || state.step == config.total_steps) {
      MetricRow row;
      row.step = state.step;
      row.d_loss = d_loss;
      row.g_loss = g_loss;
      row.energy = energy_hat(batch.batch, step_kernel);
      const Matrix samples = sample_generator(state.generator, config.eval_samples, state.eval_rng);
      if (!samples.all_finite()) diverged("non-finite generator samples", state.step, last_good);
      const ModeReport report = assign_modes(samples, config.target);
      row.modes_covered = report.modes_covered;
      row.high_quality_fraction = report.high_quality_fraction;
      state.metric_log.push_back(row);
      last_good = std::make_shared<const TrainState>(state);
      if (hooks.on_eval) hooks.on_eval(state, row, samples);
    }
  }
  return state;
}

}  // namespace coulomb
