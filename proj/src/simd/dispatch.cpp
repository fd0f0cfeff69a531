#include "coulomb/simd/dispatch.hpp"

#include <atomic>
#include <cmath>

#include "coulomb/error.hpp"
#include "simd/backends.hpp"

namespace coulomb::simd {
namespace {

constexpr KernelTable kScalarTable{Backend::Scalar, &kernel_sum_scalar, &gemm_scalar};
#if defined(COULOMB_HAVE_AVX2)
constexpr KernelTable kAvx2Table{Backend::Avx2, &kernel_sum_avx2, &gemm_avx2};
#endif
#if defined(COULOMB_HAVE_NEON)
constexpr KernelTable kNeonTable{Backend::Neon, &kernel_sum_neon, &gemm_neon};
#endif

bool cpu_has_avx2() {
#if defined(COULOMB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* initial_table() { return &table(best_backend()); }

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{initial_table()};
  return slot;
}

}  // namespace

std::string to_string(Backend backend) {
  switch (backend) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

Backend parse_backend(const std::string& name) {
  if (name == "auto") return best_backend();
  if (name == "scalar") return Backend::Scalar;
  if (name == "avx2") return Backend::Avx2;
  if (name == "neon") return Backend::Neon;
  throw InputError("unknown SIMD backend '" + name + "' (expected auto, scalar, avx2 or neon)");
}

bool is_supported(Backend backend) {
  switch (backend) {
    case Backend::Scalar: return true;
    case Backend::Avx2: return cpu_has_avx2();
    case Backend::Neon:
#if defined(COULOMB_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend best_backend() {
  if (is_supported(Backend::Avx2)) return Backend::Avx2;
  if (is_supported(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

std::vector<Backend> supported_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon})
    if (is_supported(b)) out.push_back(b);
  return out;
}

Backend active_backend() { return active_slot().load()->backend; }

void set_active_backend(Backend backend) {
  if (!is_supported(backend))
    throw InputError("SIMD backend '" + to_string(backend) + "' is not available on this machine");
  active_slot().store(&table(backend));
}

const KernelTable& table() { return *active_slot().load(); }

const KernelTable& table(Backend backend) {
  switch (backend) {
    case Backend::Scalar: return kScalarTable;
    case Backend::Avx2:
#if defined(COULOMB_HAVE_AVX2)
      return kAvx2Table;
#else
      break;
#endif
    case Backend::Neon:
#if defined(COULOMB_HAVE_NEON)
      return kNeonTable;
#else
      break;
#endif
  }
  throw InputError("SIMD backend '" + to_string(backend) + "' was not compiled in");
}

KernelParams make_params(const KernelSpec& spec) {
  KernelParams p;
  p.gaussian = spec.family == KernelFamily::Gaussian ? 1 : 0;
  p.d = spec.d;
  p.eps2 = spec.epsilon * spec.epsilon;
  p.inv_eps2 = 1.0 / p.eps2;
  const double twice = 2.0 * spec.d;
  if (!p.gaussian && twice == std::floor(twice) && twice <= 64.0) {
    const int half_units = static_cast<int>(twice);
    p.fast_power = 1;
    p.int_power = half_units / 2;
    p.half_power = half_units % 2;
  }
  return p;
}

}  // namespace coulomb::simd
