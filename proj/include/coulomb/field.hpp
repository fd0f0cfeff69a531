#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "coulomb/kernel.hpp"
#include "coulomb/matrix.hpp"
#include "coulomb/rng.hpp"
#include "coulomb/simd/dispatch.hpp"

namespace coulomb {

// One mini-batch of charges: real samples Y carry +1/N_y each, generated
// samples X carry -1/N_x each.
struct Batch {
  Matrix real;       // Y, N_y x m
  Matrix generated;  // X, N_x x m

  std::size_t dim() const noexcept { return real.cols(); }
  // Throws InputError unless both sets are non-empty and share a dimension.
  void validate() const;
};

// Structure-of-arrays copy of a point set, the layout the SIMD kernels read.
class PackedPoints {
 public:
  PackedPoints() = default;
  explicit PackedPoints(const Matrix& points);

  std::size_t count() const noexcept { return count_; }
  std::size_t dim() const noexcept { return dim_; }
  const double* data() const noexcept { return coords_.data(); }

 private:
  std::size_t count_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

// Potential and field of a fixed batch. Packs the batch once, then answers
// point queries through the active SIMD backend.
class BatchField {
 public:
  BatchField(const Batch& batch, const KernelSpec& spec);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t real_count() const noexcept { return real_.count(); }
  std::size_t generated_count() const noexcept { return generated_.count(); }

  // (1/N_y) sum_i k(a, y_i) - (1/N_x) sum_i k(a, x_i)
  double potential(std::span<const double> a) const;
  // Returns the potential and writes E(a) = -grad_a potential into `field`.
  double potential_and_field(std::span<const double> a, std::span<double> field) const;

  // Unnormalized sums over one charge class.
  double real_kernel_sum(std::span<const double> a) const;
  double generated_kernel_sum(std::span<const double> a) const;

 private:
  void check_point(std::span<const double> a) const;

  std::size_t dim_;
  PackedPoints real_;
  PackedPoints generated_;
  simd::KernelParams params_;
};

double potential_hat(std::span<const double> a, const Batch& batch, const KernelSpec& spec);

// F = 1/2 ( mean_ij k(y_i,y_j) - 2 mean_ij k(y_i,x_j) + mean_ij k(x_i,x_j) ),
// all index pairs included (self terms contribute eps^-d).
double energy_hat(const Batch& batch, const KernelSpec& spec);

// E(a) = -grad_a potential_hat(a)
Point field_hat(std::span<const double> a, const Batch& batch, const KernelSpec& spec);

// Potential at every row of `locations` (parallel over rows).
std::vector<double> potential_hat_many(const Matrix& locations, const Batch& batch,
                                       const KernelSpec& spec);
Matrix field_hat_many(const Matrix& locations, const Batch& batch, const KernelSpec& spec);

// Row i holds grad_{x_i} F = E(x_i) / N_x.
Matrix energy_grad_generated(const Batch& batch, const KernelSpec& spec);
// Row i holds grad_{y_i} F = -E(y_i) / N_y.
Matrix energy_grad_real(const Batch& batch, const KernelSpec& spec);

struct FieldSample {
  Point location;
  double potential = 0.0;
  Point field;
};

// Regular 2-D lattice with (steps + 1) points per axis.
struct Lattice2D {
  double xmin = -1.0;
  double xmax = 1.0;
  double ymin = -1.0;
  double ymax = 1.0;
  int steps = 10;

  void validate() const;
};

// Row-major over y then x (x varies fastest). Requires a 2-D batch.
std::vector<FieldSample> field_grid(const Batch& batch, const KernelSpec& spec,
                                    const Lattice2D& lattice);

// Draws n i.i.d. points.
using PointSampler = std::function<Matrix(Rng& rng, std::size_t n)>;

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t batches = 0;
};

// Mean and standard error of potential_hat(probe) over n_batches independent
// batches of batch_size real and batch_size generated samples.
MonteCarloEstimate monte_carlo_unbiasedness(std::span<const double> probe,
                                            const PointSampler& sampler_x,
                                            const PointSampler& sampler_y, std::size_t batch_size,
                                            std::size_t n_batches, const KernelSpec& spec,
                                            std::uint64_t rng_seed);

}  // namespace coulomb
