#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coulomb/field.hpp"
#include "coulomb/kernel.hpp"
#include "coulomb/matrix.hpp"

namespace coulomb {

// 0.1 * eps^(d+2) / (m d): a tenth of the inverse peak Laplacian magnitude
// of the Plummer kernel. Gaussian kernels use d = 1 in the same formula.
double default_stability_bound(const KernelSpec& spec, int m, double factor = 0.1);

// Generated samples descend the batch energy; real samples never move.
struct SimState {
  Batch batch;
  KernelSpec spec;
  double step_size = 0.0;
  long step_count = 0;
  // energy_history[0] is the initial energy; one entry is appended per step.
  std::vector<double> energy_history;
  // Steps at or below this bound are expected to decrease the energy.
  double stability_bound = 0.0;
};

// Validates the inputs, separates exactly coincident generated samples with a
// deterministic offset of at most 1e-8 * epsilon per coordinate, and records
// the initial energy.
SimState make_sim_state(Batch batch, const KernelSpec& spec, double step_size);

// x_i <- x_i - step_size * grad_{x_i} F for every generated sample, then
// appends the new energy. Throws SimulationDiverged on non-finite coordinates.
void advance(SimState& state);
SimState sim_step(SimState state);

struct Snapshot {
  long step = 0;
  double energy = 0.0;
  Matrix generated;
};

struct SimRun {
  SimState final_state;
  // First entry is the initial state, then every snapshot_every steps, and
  // always the final step.
  std::vector<Snapshot> trajectory;
};

SimRun run_sim(SimState initial, long n_steps, long snapshot_every);

// A group of points drawn from N(mean, std^2 I).
struct PointGroup {
  Point mean;
  double std = 1.0;
  std::size_t count = 0;
};

struct Scenario {
  std::string name;
  std::vector<PointGroup> real;
  std::vector<PointGroup> generated;
  KernelSpec kernel;
  double step_size = 0.05;
  long steps = 1000;
  long snapshot_every = 100;
};

// Y: 50 points around (-5, 0) and 50 around (+5, 0); X: 100 points around
// (-5, 0). Plummer d=2, eps=1, step 0.05, 5000 steps.
Scenario two_mode_escape_scenario();
// X and Y: 64 points each from N(0, I) in 2-D. Plummer d=2, eps=1, step 1, 10000 steps.
Scenario equalization_scenario();
// One real point at (1, 0), one generated point at the origin.
Scenario single_pair_scenario();
// Throws InputError for unknown names.
Scenario named_scenario(const std::string& name);

Batch draw_scenario_batch(const Scenario& scenario, std::uint64_t seed);
SimState instantiate(const Scenario& scenario, std::uint64_t seed);

// Fraction of rows within `radius` of `center`.
double fraction_within(const Matrix& points, std::span<const double> center, double radius);

}  // namespace coulomb
