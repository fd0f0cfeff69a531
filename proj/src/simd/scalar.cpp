// Reference kernels: plain loops, index-ascending accumulation.

#include <cmath>

#include "simd/backends.hpp"

namespace coulomb::simd {

double kernel_sum_scalar(const KernelParams* p, const double* a, const double* src,
                         std::size_t count, std::size_t dim, double* grad) {
  if (grad != nullptr)
    for (std::size_t c = 0; c < dim; ++c) grad[c] = 0.0;
  double sum = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    double r2 = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double diff = a[c] - src[c * count + j];
      r2 += diff * diff;
    }
    double k;
    double coef;
    if (p->gaussian) {
      k = std::exp(-0.5 * r2 * p->inv_eps2);
      coef = -k * p->inv_eps2;
    } else {
      const double s = r2 + p->eps2;
      k = std::pow(s, -0.5 * p->d);
      coef = -p->d * k / s;
    }
    sum += k;
    if (grad != nullptr) {
      for (std::size_t c = 0; c < dim; ++c) grad[c] += coef * (a[c] - src[c * count + j]);
    }
  }
  return sum;
}

void gemm_scalar(std::size_t m, std::size_t n, std::size_t k, const double* a,
                 std::size_t a_row_stride, std::size_t a_col_stride, const double* b, double* c,
                 int accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    if (!accumulate)
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    for (std::size_t t = 0; t < k; ++t) {
      const double av = a[i * a_row_stride + t * a_col_stride];
      const double* brow = b + t * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace coulomb::simd
