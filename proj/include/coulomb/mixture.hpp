#pragma once

#include <cstdint>
#include <vector>

#include "coulomb/matrix.hpp"
#include "coulomb/rng.hpp"

namespace coulomb {

// Isotropic Gaussian mixture with a shared component standard deviation.
struct MixtureSpec {
  Matrix centers;  // K x m
  double component_std = 1.0;
  std::vector<double> weights;  // K entries summing to 1

  std::size_t dim() const noexcept { return centers.cols(); }
  std::size_t components() const noexcept { return centers.rows(); }
  void validate() const;

  // Single Gaussian N(mean, std^2 I).
  static MixtureSpec gaussian(const Point& mean, double std);
  // Equal-weight mixture over the given centers.
  static MixtureSpec uniform(const Matrix& centers, double std);
};

// 5 x 5 lattice over {-21, -10.5, 0, 10.5, 21}^2, std 1, equal weights.
MixtureSpec grid_mixture_25();

// Component chosen by weight, then N(center, std^2 I).
Matrix sample_mixture(const MixtureSpec& spec, std::size_t n, Rng& rng);
Matrix sample_mixture(const MixtureSpec& spec, std::size_t n, std::uint64_t rng_seed);

struct ModeReport {
  std::vector<long> per_mode_count;
  // sqrt(mean |x - c|^2 / m) over assigned points; 0 for empty modes.
  std::vector<double> per_mode_std;
  double unassigned_fraction = 0.0;
  int modes_covered = 0;
  double high_quality_fraction = 0.0;
  long total = 0;
};

// Assigns each sample to its nearest center when within radius_sigmas *
// component_std of it. A mode counts as covered when it holds at least
// coverage_fraction of all samples.
ModeReport assign_modes(const Matrix& samples, const MixtureSpec& spec,
                        double radius_sigmas = 3.0, double coverage_fraction = 0.01);

struct Box2D {
  double xmin = -25.0;
  double xmax = 25.0;
  double ymin = -25.0;
  double ymax = 25.0;
};

// Jensen-Shannon divergence (bits) between normalized 2-D histograms of the
// two sample sets. Points outside the box fall into the nearest boundary bin.
double hist2d_jsd(const Matrix& samples_a, const Matrix& samples_b, const Box2D& range,
                  int bins_per_axis);

}  // namespace coulomb
