#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "coulomb/matrix.hpp"
#include "coulomb/rng.hpp"

namespace testing {

inline double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// ||a - b|| / max(||a||, ||b||)
inline double rel_err(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

// Central differences of f at x, one coordinate at a time.
inline std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                       std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Trace of the Hessian by second differences, Richardson-extrapolated.
inline double fd_laplacian(const std::function<double(std::span<const double>)>& f, std::vector<double> x,
                           double h) {
  auto trace = [&](double step) {
    const double f0 = f(x);
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double keep = x[i];
      x[i] = keep + step;
      const double up = f(x);
      x[i] = keep - step;
      const double down = f(x);
      x[i] = keep;
      sum += (up - 2.0 * f0 + down) / (step * step);
    }
    return sum;
  };
  return (4.0 * trace(h / 2.0) - trace(h)) / 3.0;
}

inline coulomb::Matrix random_points(coulomb::Rng& rng, std::size_t n, std::size_t m, double scale = 1.0,
                                     double shift = 0.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  coulomb::Matrix out(n, m);
  for (double& v : out.values()) v = shift + scale * normal(rng);
  return out;
}

inline std::vector<double> to_vector(std::span<const double> v) { return {v.begin(), v.end()}; }

}  // namespace testing
