#include "coulomb/field.hpp"

#include <cmath>
#include <string>

#include "coulomb/error.hpp"
#include "coulomb/parallel.hpp"

namespace coulomb {

void Batch::validate() const {
  if (real.rows() == 0) throw InputError("batch has no real samples");
  if (generated.rows() == 0) throw InputError("batch has no generated samples");
  if (real.cols() == 0) throw InputError("batch points must have dimension >= 1");
  if (real.cols() != generated.cols())
    throw InputError("real samples have dimension " + std::to_string(real.cols()) +
                     " but generated samples have " + std::to_string(generated.cols()));
}

PackedPoints::PackedPoints(const Matrix& points)
    : count_(points.rows()), dim_(points.cols()), coords_(points.size()) {
  for (std::size_t j = 0; j < count_; ++j)
    for (std::size_t c = 0; c < dim_; ++c) coords_[c * count_ + j] = points(j, c);
}

BatchField::BatchField(const Batch& batch, const KernelSpec& spec) : dim_(batch.dim()) {
  batch.validate();
  spec.validate();
  note_theory_condition(spec, static_cast<int>(dim_));
  real_ = PackedPoints(batch.real);
  generated_ = PackedPoints(batch.generated);
  params_ = simd::make_params(spec);
}

void BatchField::check_point(std::span<const double> a) const {
  if (a.size() != dim_)
    throw InputError("evaluation point has dimension " + std::to_string(a.size()) +
                     ", batch has " + std::to_string(dim_));
}

double BatchField::real_kernel_sum(std::span<const double> a) const {
  check_point(a);
  return simd::table().kernel_sum(&params_, a.data(), real_.data(), real_.count(), dim_, nullptr);
}

double BatchField::generated_kernel_sum(std::span<const double> a) const {
  check_point(a);
  return simd::table().kernel_sum(&params_, a.data(), generated_.data(), generated_.count(), dim_,
                                  nullptr);
}

double BatchField::potential(std::span<const double> a) const {
  return real_kernel_sum(a) / static_cast<double>(real_.count()) -
         generated_kernel_sum(a) / static_cast<double>(generated_.count());
}

double BatchField::potential_and_field(std::span<const double> a, std::span<double> field) const {
  check_point(a);
  if (field.size() != dim_) throw InputError("field output has wrong dimension");
  const auto& t = simd::table();
  std::vector<double> grad_real(dim_);
  std::vector<double> grad_gen(dim_);
  const double sum_real =
      t.kernel_sum(&params_, a.data(), real_.data(), real_.count(), dim_, grad_real.data());
  const double sum_gen = t.kernel_sum(&params_, a.data(), generated_.data(), generated_.count(),
                                      dim_, grad_gen.data());
  const double ny = static_cast<double>(real_.count());
  const double nx = static_cast<double>(generated_.count());
  for (std::size_t c = 0; c < dim_; ++c) field[c] = -grad_real[c] / ny + grad_gen[c] / nx;
  return sum_real / ny - sum_gen / nx;
}

double potential_hat(std::span<const double> a, const Batch& batch, const KernelSpec& spec) {
  return BatchField(batch, spec).potential(a);
}

double energy_hat(const Batch& batch, const KernelSpec& spec) {
  const BatchField field(batch, spec);
  const std::size_t ny = batch.real.rows();
  const std::size_t nx = batch.generated.rows();

  // Row sums are independent; the totals are accumulated in row order.
  std::vector<double> yy(ny), yx(ny), xx(nx);
  parallel_for(ny, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      yy[i] = field.real_kernel_sum(batch.real.row(i));
      yx[i] = field.generated_kernel_sum(batch.real.row(i));
    }
  });
  parallel_for(nx, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) xx[i] = field.generated_kernel_sum(batch.generated.row(i));
  });
  double syy = 0.0, syx = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < ny; ++i) {
    syy += yy[i];
    syx += yx[i];
  }
  for (std::size_t i = 0; i < nx; ++i) sxx += xx[i];

  const double fy = static_cast<double>(ny);
  const double fx = static_cast<double>(nx);
  return 0.5 * (syy / (fy * fy) - 2.0 * syx / (fy * fx) + sxx / (fx * fx));
}

Point field_hat(std::span<const double> a, const Batch& batch, const KernelSpec& spec) {
  Point out(batch.dim());
  BatchField(batch, spec).potential_and_field(a, out);
  return out;
}

std::vector<double> potential_hat_many(const Matrix& locations, const Batch& batch,
                                       const KernelSpec& spec) {
  const BatchField field(batch, spec);
  if (locations.rows() > 0 && locations.cols() != field.dim())
    throw InputError("evaluation locations have the wrong dimension");
  std::vector<double> out(locations.rows());
  parallel_for(locations.rows(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = field.potential(locations.row(i));
  });
  return out;
}

Matrix field_hat_many(const Matrix& locations, const Batch& batch, const KernelSpec& spec) {
  const BatchField field(batch, spec);
  if (locations.rows() > 0 && locations.cols() != field.dim())
    throw InputError("evaluation locations have the wrong dimension");
  Matrix out(locations.rows(), field.dim());
  parallel_for(locations.rows(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) field.potential_and_field(locations.row(i), out.row(i));
  });
  return out;
}

Matrix energy_grad_generated(const Batch& batch, const KernelSpec& spec) {
  Matrix grad = field_hat_many(batch.generated, batch, spec);
  const double inv = 1.0 / static_cast<double>(batch.generated.rows());
  for (double& v : grad.values()) v *= inv;
  return grad;
}

Matrix energy_grad_real(const Batch& batch, const KernelSpec& spec) {
  Matrix grad = field_hat_many(batch.real, batch, spec);
  const double inv = -1.0 / static_cast<double>(batch.real.rows());
  for (double& v : grad.values()) v *= inv;
  return grad;
}

void Lattice2D::validate() const {
  if (steps < 1) throw InputError("lattice needs steps >= 1");
  if (!(xmax > xmin) || !(ymax > ymin)) throw InputError("lattice bounds must satisfy min < max");
}

std::vector<FieldSample> field_grid(const Batch& batch, const KernelSpec& spec,
                                    const Lattice2D& lattice) {
  lattice.validate();
  batch.validate();
  if (batch.dim() != 2) throw InputError("field grids need a 2-D batch");
  const int n = lattice.steps + 1;
  Matrix locations(static_cast<std::size_t>(n) * n, 2);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const std::size_t r = static_cast<std::size_t>(iy) * n + ix;
      locations(r, 0) = lattice.xmin + (lattice.xmax - lattice.xmin) * ix / lattice.steps;
      locations(r, 1) = lattice.ymin + (lattice.ymax - lattice.ymin) * iy / lattice.steps;
    }
  }
  const BatchField field(batch, spec);
  std::vector<FieldSample> out(locations.rows());
  parallel_for(locations.rows(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      FieldSample& s = out[i];
      s.location.assign(locations.row(i).begin(), locations.row(i).end());
      s.field.resize(2);
      s.potential = field.potential_and_field(locations.row(i), s.field);
    }
  });
  return out;
}

MonteCarloEstimate monte_carlo_unbiasedness(std::span<const double> probe,
                                            const PointSampler& sampler_x,
                                            const PointSampler& sampler_y, std::size_t batch_size,
                                            std::size_t n_batches, const KernelSpec& spec,
                                            std::uint64_t rng_seed) {
  if (n_batches < 100) throw InputError("monte carlo check needs at least 100 batches");
  if (batch_size < 1) throw InputError("batch size must be >= 1");
  Rng rng_x = make_rng(rng_seed, Stream::Latent);
  Rng rng_y = make_rng(rng_seed, Stream::Data);

  // Welford accumulation keeps the variance stable for many batches.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t b = 0; b < n_batches; ++b) {
    Batch batch{sampler_y(rng_y, batch_size), sampler_x(rng_x, batch_size)};
    const double value = potential_hat(probe, batch, spec);
    const double delta = value - mean;
    mean += delta / static_cast<double>(b + 1);
    m2 += delta * (value - mean);
  }
  const double variance = m2 / static_cast<double>(n_batches - 1);
  return {mean, std::sqrt(variance / static_cast<double>(n_batches)), n_batches};
}

}  // namespace coulomb
