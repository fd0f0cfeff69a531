#include "coulomb/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "coulomb/error.hpp"

namespace coulomb {

void MixtureSpec::validate() const {
  if (centers.rows() == 0 || centers.cols() == 0) throw InputError("mixture needs at least one center");
  if (weights.size() != centers.rows())
    throw InputError("mixture has " + std::to_string(weights.size()) + " weights for " +
                     std::to_string(centers.rows()) + " centers");
  if (!(component_std >= 0.0) || !std::isfinite(component_std))
    throw InputError("mixture component std must be finite and non-negative");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw InputError("mixture weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InputError("mixture weights must sum to 1");
}

MixtureSpec MixtureSpec::gaussian(const Point& mean, double std) {
  MixtureSpec spec;
  spec.centers.append_row(mean);
  spec.component_std = std;
  spec.weights = {1.0};
  spec.validate();
  return spec;
}

MixtureSpec MixtureSpec::uniform(const Matrix& centers, double std) {
  MixtureSpec spec;
  spec.centers = centers;
  spec.component_std = std;
  spec.weights.assign(centers.rows(), 1.0 / static_cast<double>(centers.rows()));
  spec.validate();
  return spec;
}

MixtureSpec grid_mixture_25() {
  const double coords[] = {-21.0, -10.5, 0.0, 10.5, 21.0};
  Matrix centers;
  for (double x : coords)
    for (double y : coords) centers.append_row(std::vector<double>{x, y});
  return MixtureSpec::uniform(centers, 1.0);
}

Matrix sample_mixture(const MixtureSpec& spec, std::size_t n, Rng& rng) {
  spec.validate();
  const std::size_t m = spec.dim();
  Matrix out(n, m);
  std::discrete_distribution<std::size_t> pick(spec.weights.begin(), spec.weights.end());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = spec.components() == 1 ? 0 : pick(rng);
    for (std::size_t c = 0; c < m; ++c)
      out(i, c) = spec.centers(k, c) + spec.component_std * normal(rng);
  }
  return out;
}

Matrix sample_mixture(const MixtureSpec& spec, std::size_t n, std::uint64_t rng_seed) {
  Rng rng = make_rng(rng_seed, Stream::Data);
  return sample_mixture(spec, n, rng);
}

ModeReport assign_modes(const Matrix& samples, const MixtureSpec& spec, double radius_sigmas,
                        double coverage_fraction) {
  spec.validate();
  if (!(radius_sigmas > 0.0)) throw InputError("radius_sigmas must be positive");
  if (samples.rows() > 0 && samples.cols() != spec.dim())
    throw InputError("samples have dimension " + std::to_string(samples.cols()) +
                     ", mixture has " + std::to_string(spec.dim()));

  const std::size_t k_count = spec.components();
  const std::size_t m = spec.dim();
  const double radius = radius_sigmas * spec.component_std;
  const double radius2 = radius * radius;

  ModeReport report;
  report.total = static_cast<long>(samples.rows());
  report.per_mode_count.assign(k_count, 0);
  std::vector<double> sq_dist_sum(k_count, 0.0);
  long assigned = 0;

  for (std::size_t i = 0; i < samples.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < k_count; ++k) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        const double diff = samples(i, c) - spec.centers(k, c);
        d2 += diff * diff;
      }
      if (d2 < best) {
        best = d2;
        best_k = k;
      }
    }
    if (best <= radius2) {
      ++report.per_mode_count[best_k];
      sq_dist_sum[best_k] += best;
      ++assigned;
    }
  }

  report.per_mode_std.assign(k_count, 0.0);
  for (std::size_t k = 0; k < k_count; ++k) {
    if (report.per_mode_count[k] > 0)
      report.per_mode_std[k] = std::sqrt(
          sq_dist_sum[k] / (static_cast<double>(report.per_mode_count[k]) * static_cast<double>(m)));
    if (report.total > 0 &&
        static_cast<double>(report.per_mode_count[k]) >= coverage_fraction * static_cast<double>(report.total))
      ++report.modes_covered;
  }
  if (report.total > 0) {
    report.high_quality_fraction = static_cast<double>(assigned) / static_cast<double>(report.total);
    report.unassigned_fraction =
        static_cast<double>(report.total - assigned) / static_cast<double>(report.total);
  }
  return report;
}

namespace {

int bin_index(double v, double lo, double hi, int bins) {
  if (!(v > lo)) return 0;  // also catches NaN
  if (v >= hi) return bins - 1;
  const int b = static_cast<int>((v - lo) / (hi - lo) * bins);
  return std::clamp(b, 0, bins - 1);
}

std::vector<double> histogram(const Matrix& samples, const Box2D& range, int bins) {
  std::vector<double> h(static_cast<std::size_t>(bins) * bins, 0.0);
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    const int bx = bin_index(samples(i, 0), range.xmin, range.xmax, bins);
    const int by = bin_index(samples(i, 1), range.ymin, range.ymax, bins);
    h[static_cast<std::size_t>(by) * bins + bx] += 1.0;
  }
  const double n = static_cast<double>(samples.rows());
  for (double& v : h) v /= n;
  return h;
}

}  // namespace

double hist2d_jsd(const Matrix& samples_a, const Matrix& samples_b, const Box2D& range,
                  int bins_per_axis) {
  if (bins_per_axis < 2) throw InputError("hist2d_jsd needs bins_per_axis >= 2");
  if (samples_a.rows() == 0 || samples_b.rows() == 0) throw InputError("hist2d_jsd needs non-empty sample sets");
  if (samples_a.cols() != 2 || samples_b.cols() != 2) throw InputError("hist2d_jsd needs 2-D samples");
  if (!(range.xmax > range.xmin) || !(range.ymax > range.ymin)) throw InputError("histogram range is empty");

  const auto p = histogram(samples_a, range, bins_per_axis);
  const auto q = histogram(samples_b, range, bins_per_axis);
  auto term = [](double x, double mid) { return x > 0.0 ? x * std::log2(x / mid) : 0.0; };
  double jsd = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double mid = 0.5 * (p[i] + q[i]);
    if (mid > 0.0) jsd += 0.5 * (term(p[i], mid) + term(q[i], mid));
  }
  return std::clamp(jsd, 0.0, 1.0);
}

}  // namespace coulomb
