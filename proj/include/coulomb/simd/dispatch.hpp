#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "coulomb/kernel.hpp"

// Runtime selection between the scalar reference kernels and the vectorized
// variants. All backends compute the same quantities; results agree to
// rounding (the vector paths use fused multiply-add and a 4- or 2-lane
// accumulation order) and are deterministic for a fixed backend.
namespace coulomb::simd {

enum class Backend { Scalar, Avx2, Neon };

std::string to_string(Backend backend);
// Accepts "scalar", "avx2", "neon"; "auto" maps to best_backend().
Backend parse_backend(const std::string& name);

bool is_supported(Backend backend);
Backend best_backend();
std::vector<Backend> supported_backends();

Backend active_backend();
// Throws InputError if the backend is not compiled in or not supported by the CPU.
void set_active_backend(Backend backend);

// Kernel parameters pre-digested for the inner loops.
struct KernelParams {
  int gaussian = 0;      // 0 = Plummer, 1 = Gaussian
  double d = 1.0;
  double eps2 = 1.0;
  double inv_eps2 = 1.0;
  // Plummer fast power: s^(-d/2) = q^int_power * sqrt(q)^half_power, q = 1/sqrt(s).
  // Used when 2d is an integer <= 64, otherwise pow() is called per lane.
  int fast_power = 0;
  int int_power = 0;
  int half_power = 0;
};

KernelParams make_params(const KernelSpec& spec);

// Sum over sources j of k(a, s_j). Sources are packed structure-of-arrays:
// coordinate c of source j is src[c * count + j]. When `grad` is non-null it
// receives sum_j grad_a k(a, s_j) (dim entries, overwritten).
using KernelSumFn = double (*)(const KernelParams* params, const double* a, const double* src,
                               std::size_t count, std::size_t dim, double* grad);

// C(i, j) = [C(i, j) if accumulate] + sum_k A(i, k) B(k, j), k ascending.
// A(i, k) = a[i * a_row_stride + k * a_col_stride]; B is K x N and C is M x N,
// both dense row-major.
using GemmFn = void (*)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                        std::size_t a_row_stride, std::size_t a_col_stride, const double* b,
                        double* c, int accumulate);

struct KernelTable {
  Backend backend;
  KernelSumFn kernel_sum;
  GemmFn gemm;
};

const KernelTable& table();
const KernelTable& table(Backend backend);

}  // namespace coulomb::simd
