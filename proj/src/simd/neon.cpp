// AArch64 NEON variants (two double lanes). Advanced SIMD is mandatory on
// AArch64, so no runtime probe is needed beyond the build-time check.

#include <arm_neon.h>

#include <cmath>

#include "simd/backends.hpp"

namespace coulomb::simd {
namespace {

inline float64x2_t power(float64x2_t base, int n) {
  float64x2_t result = vdupq_n_f64(1.0);
  while (n > 0) {
    if (n & 1) result = vmulq_f64(result, base);
    n >>= 1;
    if (n > 0) base = vmulq_f64(base, base);
  }
  return result;
}

inline void evaluate(const KernelParams* p, float64x2_t r2, float64x2_t* value,
                     float64x2_t* coef) {
  if (!p->gaussian && p->fast_power) {
    const float64x2_t s = vaddq_f64(r2, vdupq_n_f64(p->eps2));
    const float64x2_t q = vdivq_f64(vdupq_n_f64(1.0), vsqrtq_f64(s));
    float64x2_t k = power(q, p->int_power);
    if (p->half_power) k = vmulq_f64(k, vsqrtq_f64(q));
    *value = k;
    *coef = vdivq_f64(vmulq_f64(vdupq_n_f64(-p->d), k), s);
    return;
  }
  double lanes[2];
  double k[2];
  double c[2];
  vst1q_f64(lanes, r2);
  for (int l = 0; l < 2; ++l) {
    if (p->gaussian) {
      k[l] = std::exp(-0.5 * lanes[l] * p->inv_eps2);
      c[l] = -k[l] * p->inv_eps2;
    } else {
      const double s = lanes[l] + p->eps2;
      k[l] = std::pow(s, -0.5 * p->d);
      c[l] = -p->d * k[l] / s;
    }
  }
  *value = vld1q_f64(k);
  *coef = vld1q_f64(c);
}

inline double hsum(float64x2_t v) { return vgetq_lane_f64(v, 0) + vgetq_lane_f64(v, 1); }

}  // namespace

double kernel_sum_neon(const KernelParams* p, const double* a, const double* src,
                       std::size_t count, std::size_t dim, double* grad) {
  if (dim == 0 || dim > kMaxVectorDim) return kernel_sum_scalar(p, a, src, count, dim, grad);

  float64x2_t point[kMaxVectorDim];
  float64x2_t gacc[kMaxVectorDim];
  for (std::size_t c = 0; c < dim; ++c) {
    point[c] = vdupq_n_f64(a[c]);
    gacc[c] = vdupq_n_f64(0.0);
  }
  float64x2_t acc = vdupq_n_f64(0.0);

  std::size_t j = 0;
  for (; j + 2 <= count; j += 2) {
    float64x2_t diff[kMaxVectorDim];
    float64x2_t r2 = vdupq_n_f64(0.0);
    for (std::size_t c = 0; c < dim; ++c) {
      diff[c] = vsubq_f64(point[c], vld1q_f64(src + c * count + j));
      r2 = vfmaq_f64(r2, diff[c], diff[c]);
    }
    float64x2_t k;
    float64x2_t coef;
    evaluate(p, r2, &k, &coef);
    acc = vaddq_f64(acc, k);
    if (grad != nullptr)
      for (std::size_t c = 0; c < dim; ++c) gacc[c] = vfmaq_f64(gacc[c], coef, diff[c]);
  }

  double sum = hsum(acc);
  if (grad != nullptr)
    for (std::size_t c = 0; c < dim; ++c) grad[c] = hsum(gacc[c]);

  for (; j < count; ++j) {
    double diff[kMaxVectorDim];
    double r2 = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      diff[c] = a[c] - src[c * count + j];
      r2 += diff[c] * diff[c];
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
      for (std::size_t c = 0; c < dim; ++c) grad[c] += coef * diff[c];
  }
  return sum;
}

void gemm_neon(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t a_row_stride, std::size_t a_col_stride, const double* b, double* c,
               int accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * a_row_stride;
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      float64x2_t c0, c1, c2, c3;
      if (accumulate) {
        c0 = vld1q_f64(crow + j);
        c1 = vld1q_f64(crow + j + 2);
        c2 = vld1q_f64(crow + j + 4);
        c3 = vld1q_f64(crow + j + 6);
      } else {
        c0 = c1 = c2 = c3 = vdupq_n_f64(0.0);
      }
      for (std::size_t t = 0; t < k; ++t) {
        const float64x2_t av = vdupq_n_f64(arow[t * a_col_stride]);
        const double* brow = b + t * n + j;
        c0 = vfmaq_f64(c0, av, vld1q_f64(brow));
        c1 = vfmaq_f64(c1, av, vld1q_f64(brow + 2));
        c2 = vfmaq_f64(c2, av, vld1q_f64(brow + 4));
        c3 = vfmaq_f64(c3, av, vld1q_f64(brow + 6));
      }
      vst1q_f64(crow + j, c0);
      vst1q_f64(crow + j + 2, c1);
      vst1q_f64(crow + j + 4, c2);
      vst1q_f64(crow + j + 6, c3);
    }
    for (; j < n; ++j) {
      double v = accumulate ? crow[j] : 0.0;
      for (std::size_t t = 0; t < k; ++t) v += arow[t * a_col_stride] * b[t * n + j];
      crow[j] = v;
    }
  }
}

}  // namespace coulomb::simd
