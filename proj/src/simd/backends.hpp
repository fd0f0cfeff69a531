#pragma once

// Entry points implemented by each backend translation unit. This header is
// included by files compiled with wider instruction sets, so it must not pull
// in inline library code.

#include <cstddef>

#include "coulomb/simd/dispatch.hpp"

namespace coulomb::simd {

inline constexpr std::size_t kMaxVectorDim = 16;

double kernel_sum_scalar(const KernelParams* p, const double* a, const double* src,
                         std::size_t count, std::size_t dim, double* grad);
void gemm_scalar(std::size_t m, std::size_t n, std::size_t k, const double* a,
                 std::size_t a_row_stride, std::size_t a_col_stride, const double* b, double* c,
                 int accumulate);

#if defined(COULOMB_HAVE_AVX2)
double kernel_sum_avx2(const KernelParams* p, const double* a, const double* src,
                       std::size_t count, std::size_t dim, double* grad);
void gemm_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t a_row_stride, std::size_t a_col_stride, const double* b, double* c,
               int accumulate);
#endif

#if defined(COULOMB_HAVE_NEON)
double kernel_sum_neon(const KernelParams* p, const double* a, const double* src,
                       std::size_t count, std::size_t dim, double* grad);
void gemm_neon(std::size_t m, std::size_t n, std::size_t k, const double* a,
               std::size_t a_row_stride, std::size_t a_col_stride, const double* b, double* c,
               int accumulate);
#endif

}  // namespace coulomb::simd
