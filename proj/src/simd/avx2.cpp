// AVX2 + FMA variants. Built with -mavx2 -mfma and only called after the
// dispatcher has confirmed CPU support.

#include <immintrin.h>

#include <cmath>

#include "simd/backends.hpp"

namespace coulomb::simd {
namespace {

inline double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

inline __m256d power(__m256d base, int n) {
  __m256d result = _mm256_set1_pd(1.0);
  while (n > 0) {
    if (n & 1) result = _mm256_mul_pd(result, base);
    n >>= 1;
    if (n > 0) base = _mm256_mul_pd(base, base);
  }
  return result;
}

// Kernel value and gradient coefficient for four squared distances.
inline void evaluate(const KernelParams* p, __m256d r2, __m256d* value, __m256d* coef) {
  if (!p->gaussian && p->fast_power) {
    const __m256d s = _mm256_add_pd(r2, _mm256_set1_pd(p->eps2));
    const __m256d q = _mm256_div_pd(_mm256_set1_pd(1.0), _mm256_sqrt_pd(s));
    __m256d k = power(q, p->int_power);
    if (p->half_power) k = _mm256_mul_pd(k, _mm256_sqrt_pd(q));
    *value = k;
    *coef = _mm256_div_pd(_mm256_mul_pd(_mm256_set1_pd(-p->d), k), s);
    return;
  }
  alignas(32) double lanes[4];
  alignas(32) double k[4];
  alignas(32) double c[4];
  _mm256_store_pd(lanes, r2);
  for (int l = 0; l < 4; ++l) {
    if (p->gaussian) {
      k[l] = std::exp(-0.5 * lanes[l] * p->inv_eps2);
      c[l] = -k[l] * p->inv_eps2;
    } else {
      const double s = lanes[l] + p->eps2;
      k[l] = std::pow(s, -0.5 * p->d);
      c[l] = -p->d * k[l] / s;
    }
  }
  *value = _mm256_load_pd(k);
  *coef = _mm256_load_pd(c);
}

}  // namespace

double kernel_sum_avx2(const KernelParams* p, const double* a, const double* src,
                       std::size_t count, std::size_t dim, double* grad) {
  if (dim == 0 || dim > kMaxVectorDim) return kernel_sum_scalar(p, a, src, count, dim, grad);

  __m256d point[kMaxVectorDim];
  __m256d gacc[kMaxVectorDim];
  for (std::size_t c = 0; c < dim; ++c) {
    point[c] = _mm256_set1_pd(a[c]);
    gacc[c] = _mm256_setzero_pd();
  }
  __m256d acc = _mm256_setzero_pd();

  std::size_t j = 0;
  for (; j + 4 <= count; j += 4) {
    __m256d diff[kMaxVectorDim];
    __m256d r2 = _mm256_setzero_pd();
    for (std::size_t c = 0; c < dim; ++c) {
      diff[c] = _mm256_sub_pd(point[c], _mm256_loadu_pd(src + c * count + j));
      r2 = _mm256_fmadd_pd(diff[c], diff[c], r2);
    }
    __m256d k;
    __m256d coef;
    evaluate(p, r2, &k, &coef);
    acc = _mm256_add_pd(acc, k);
    if (grad != nullptr)
      for (std::size_t c = 0; c < dim; ++c) gacc[c] = _mm256_fmadd_pd(coef, diff[c], gacc[c]);
  }

  double sum = hsum(acc);
  if (grad != nullptr)
    for (std::size_t c = 0; c < dim; ++c) grad[c] = hsum(gacc[c]);

  if (j < count) {
    // Tail: reference loop over the remaining sources, same packing.
    double tail_grad[kMaxVectorDim];
    for (; j < count; ++j) {
      double r2 = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        tail_grad[c] = a[c] - src[c * count + j];
        r2 += tail_grad[c] * tail_grad[c];
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
      if (grad != nullptr)
        for (std::size_t c = 0; c < dim; ++c) grad[c] += coef * tail_grad[c];
    }
  }
  return sum;
}

namespace {

// R rows of C times 8 columns. Every element accumulates over t in order, so
// blocking does not change results.
template <std::size_t R>
inline void gemm_block8(std::size_t n, std::size_t k, const double* const* arows,
                        std::size_t a_col_stride, const double* b, double* const* crows, std::size_t j,
                        int accumulate) {
  __m256d lo[R], hi[R];
  for (std::size_t r = 0; r < R; ++r) {
    lo[r] = accumulate ? _mm256_loadu_pd(crows[r] + j) : _mm256_setzero_pd();
    hi[r] = accumulate ? _mm256_loadu_pd(crows[r] + j + 4) : _mm256_setzero_pd();
  }
  for (std::size_t t = 0; t < k; ++t) {
    const double* brow = b + t * n + j;
    const __m256d b0 = _mm256_loadu_pd(brow);
    const __m256d b1 = _mm256_loadu_pd(brow + 4);
    for (std::size_t r = 0; r < R; ++r) {
      const __m256d av = _mm256_broadcast_sd(arows[r] + t * a_col_stride);
      lo[r] = _mm256_fmadd_pd(av, b0, lo[r]);
      hi[r] = _mm256_fmadd_pd(av, b1, hi[r]);
    }
  }
  for (std::size_t r = 0; r < R; ++r) {
    _mm256_storeu_pd(crows[r] + j, lo[r]);
    _mm256_storeu_pd(crows[r] + j + 4, hi[r]);
  }
}

template <std::size_t R>
inline void gemm_rows(std::size_t n, std::size_t k, const double* const* arows, std::size_t a_col_stride,
                      const double* b, double* const* crows, int accumulate) {
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) gemm_block8<R>(n, k, arows, a_col_stride, b, crows, j, accumulate);
  for (; j + 4 <= n; j += 4) {
    for (std::size_t r = 0; r < R; ++r) {
      __m256d c0 = accumulate ? _mm256_loadu_pd(crows[r] + j) : _mm256_setzero_pd();
      for (std::size_t t = 0; t < k; ++t)
        c0 = _mm256_fmadd_pd(_mm256_set1_pd(arows[r][t * a_col_stride]), _mm256_loadu_pd(b + t * n + j), c0);
      _mm256_storeu_pd(crows[r] + j, c0);
    }
  }
  for (; j < n; ++j) {
    for (std::size_t r = 0; r < R; ++r) {
      double v = accumulate ? crows[r][j] : 0.0;
      for (std::size_t t = 0; t < k; ++t) v += arows[r][t * a_col_stride] * b[t * n + j];
      crows[r][j] = v;
    }
  }
}

}  // namespace

void gemm_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t a_row_stride, std::size_t a_col_stride, const double* b, double* c,
               int accumulate) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const double* arows[4] = {a + i * a_row_stride, a + (i + 1) * a_row_stride, a + (i + 2) * a_row_stride,
                              a + (i + 3) * a_row_stride};
    double* crows[4] = {c + i * n, c + (i + 1) * n, c + (i + 2) * n, c + (i + 3) * n};
    gemm_rows<4>(n, k, arows, a_col_stride, b, crows, accumulate);
  }
  for (; i < m; ++i) {
    const double* arow = a + i * a_row_stride;
    double* crow = c + i * n;
    gemm_rows<1>(n, k, &arow, a_col_stride, b, &crow, accumulate);
  }
}

}  // namespace coulomb::simd
