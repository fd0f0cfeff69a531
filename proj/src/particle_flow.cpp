#include "coulomb/particle_flow.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "coulomb/error.hpp"

namespace coulomb {

double default_stability_bound(const KernelSpec& spec, int m, double factor) {
  const double d = spec.family == KernelFamily::Plummer ? spec.d : 1.0;
  return factor * std::pow(spec.epsilon, d + 2.0) / (static_cast<double>(m) * d);
}

namespace {

void separate_ties(Matrix& x, double epsilon) {
  const std::size_t m = x.cols();
  for (std::size_t i = 1; i < x.rows(); ++i) {
    bool tied = false;
    for (std::size_t j = 0; j < i && !tied; ++j) tied = std::equal(x.row(i).begin(), x.row(i).end(), x.row(j).begin());
    if (!tied) continue;
    for (std::size_t c = 0; c < m; ++c) {
      // Golden-ratio sequence in [-1, 1).
      const double phase = std::fmod(static_cast<double>(i * m + c + 1) * 0.6180339887498949, 1.0);
      x(i, c) += 1e-8 * epsilon * (2.0 * phase - 1.0);
    }
  }
}

}  // namespace

SimState make_sim_state(Batch batch, const KernelSpec& spec, double step_size) {
  batch.validate();
  spec.validate();
  if (!(step_size > 0.0) || !std::isfinite(step_size)) throw InputError("step size must be positive");
  separate_ties(batch.generated, spec.epsilon);
  SimState state;
  state.stability_bound = default_stability_bound(spec, static_cast<int>(batch.dim()));
  state.energy_history.push_back(energy_hat(batch, spec));
  state.batch = std::move(batch);
  state.spec = spec;
  state.step_size = step_size;
  return state;
}

void advance(SimState& state) {
  const Matrix grad = energy_grad_generated(state.batch, state.spec);
  Matrix x = state.batch.generated;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = x.row(i);
    for (std::size_t c = 0; c < x.cols(); ++c) row[c] -= state.step_size * grad(i, c);
    for (double v : row)
      if (!std::isfinite(v)) throw SimulationDiverged(i, state.step_count + 1);
  }
  state.batch.generated = std::move(x);
  ++state.step_count;
  state.energy_history.push_back(energy_hat(state.batch, state.spec));
}

SimState sim_step(SimState state) {
  advance(state);
  return state;
}

SimRun run_sim(SimState initial, long n_steps, long snapshot_every) {
  if (n_steps < 1) throw InputError("run_sim needs n_steps >= 1");
  if (snapshot_every < 1) throw InputError("snapshot_every must be >= 1");
  SimRun run;
  run.trajectory.push_back({initial.step_count, initial.energy_history.back(), initial.batch.generated});
  run.final_state = std::move(initial);
  SimState& state = run.final_state;
  for (long s = 1; s <= n_steps; ++s) {
    advance(state);
    if (s % snapshot_every == 0 || s == n_steps)
      run.trajectory.push_back({state.step_count, state.energy_history.back(), state.batch.generated});
  }
  return run;
}

Scenario two_mode_escape_scenario() {
  Scenario s;
  s.name = "two-mode-escape";
  s.real = {{{-5.0, 0.0}, 1.0, 50}, {{5.0, 0.0}, 1.0, 50}};
  s.generated = {{{-5.0, 0.0}, 1.0, 100}};
  s.kernel = KernelSpec::plummer(2.0, 1.0);
  s.step_size = 0.05;
  s.steps = 5000;
  s.snapshot_every = 100;
  return s;
}

Scenario equalization_scenario() {
  Scenario s;
  s.name = "equalize";
  s.real = {{{0.0, 0.0}, 1.0, 64}};
  s.generated = {{{0.0, 0.0}, 1.0, 64}};
  s.kernel = KernelSpec::plummer(2.0, 1.0);
  s.step_size = 1.0;
  s.steps = 10000;
  s.snapshot_every = 500;
  return s;
}

Scenario single_pair_scenario() {
  Scenario s;
  s.name = "single-pair";
  s.real = {{{1.0, 0.0}, 0.0, 1}};
  s.generated = {{{0.0, 0.0}, 0.0, 1}};
  s.kernel = KernelSpec::plummer(2.0, 1.0);
  s.step_size = 0.05;
  s.steps = 100;
  s.snapshot_every = 10;
  return s;
}

Scenario named_scenario(const std::string& name) {
  if (name == "two-mode-escape") return two_mode_escape_scenario();
  if (name == "equalize") return equalization_scenario();
  if (name == "single-pair") return single_pair_scenario();
  throw InputError("unknown scenario '" + name + "' (expected two-mode-escape, equalize or single-pair)");
}

namespace {

Matrix draw_groups(const std::vector<PointGroup>& groups, Rng& rng) {
  Matrix out;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& g : groups) {
    if (g.mean.empty()) throw InputError("point group needs a mean");
    Point p(g.mean.size());
    for (std::size_t i = 0; i < g.count; ++i) {
      for (std::size_t c = 0; c < p.size(); ++c) p[c] = g.mean[c] + g.std * normal(rng);
      out.append_row(p);
    }
  }
  return out;
}

}  // namespace

Batch draw_scenario_batch(const Scenario& scenario, std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::Simulation);
  Batch batch;
  batch.real = draw_groups(scenario.real, rng);
  batch.generated = draw_groups(scenario.generated, rng);
  return batch;
}

SimState instantiate(const Scenario& scenario, std::uint64_t seed) {
  return make_sim_state(draw_scenario_batch(scenario, seed), scenario.kernel, scenario.step_size);
}

double fraction_within(const Matrix& points, std::span<const double> center, double radius) {
  if (points.rows() == 0) return 0.0;
  if (center.size() != points.cols()) throw InputError("center has the wrong dimension");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < points.cols(); ++c) {
      const double diff = points(i, c) - center[c];
      d2 += diff * diff;
    }
    if (d2 < radius * radius) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(points.rows());
}

}  // namespace coulomb
