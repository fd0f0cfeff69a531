#include <cmath>
#include <random>
#include <vector>

#include "coulomb/error.hpp"
#include "coulomb/field.hpp"
#include "coulomb/kernel.hpp"
#include "coulomb/simd/dispatch.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace coulomb;

namespace {

struct Scoped {
  simd::Backend saved = simd::active_backend();
  ~Scoped() { simd::set_active_backend(saved); }
};

// Reference sum computed directly from kernel_value/kernel_grad.
double direct_sum(const KernelSpec& spec, std::span<const double> a, const Matrix& src, std::vector<double>& grad) {
  double s = 0.0;
  grad.assign(a.size(), 0.0);
  for (std::size_t j = 0; j < src.rows(); ++j) {
    s += kernel_value(a, src.row(j), spec);
    const auto g = kernel_grad(a, src.row(j), spec);
    for (std::size_t c = 0; c < a.size(); ++c) grad[c] += g[c];
  }
  return s;
}

}  // namespace

TEST_CASE("backend names and support") {
  CHECK(simd::is_supported(simd::Backend::Scalar));
  CHECK(simd::parse_backend("scalar") == simd::Backend::Scalar);
  CHECK(simd::parse_backend("auto") == simd::best_backend());
  CHECK_THROWS_AS(simd::parse_backend("sse9"), InputError);
  CHECK(simd::is_supported(simd::best_backend()));
  for (auto b : {simd::Backend::Scalar, simd::Backend::Avx2, simd::Backend::Neon}) {
    if (!simd::is_supported(b)) CHECK_THROWS_AS(simd::set_active_backend(b), InputError);
  }
  Scoped keep;
  simd::set_active_backend(simd::Backend::Scalar);
  CHECK(simd::table().backend == simd::Backend::Scalar);
  CHECK(simd::active_backend() == simd::Backend::Scalar);
}

TEST_CASE("scalar kernel sum agrees with the point functions") {
  Rng rng = make_rng(21, 0);
  const auto& scalar = simd::table(simd::Backend::Scalar);
  for (const auto& spec : {KernelSpec::plummer(3, 3), KernelSpec::plummer(1.3, 0.5), KernelSpec::gaussian(1.7)}) {
    for (std::size_t m : {1u, 2u, 5u}) {
      const Matrix src = testing::random_points(rng, 23, m, 2.0);
      const Matrix a = testing::random_points(rng, 1, m, 2.0);
      const PackedPoints packed(src);
      const auto params = simd::make_params(spec);
      std::vector<double> grad(m), ref_grad;
      const double s = scalar.kernel_sum(&params, a.data(), packed.data(), packed.count(), m, grad.data());
      const double ref = direct_sum(spec, a.row(0), src, ref_grad);
      CHECK(testing::rel_err(s, ref) < 1e-13);
      CHECK(testing::rel_err(grad, ref_grad) < 1e-13);
    }
  }
}

TEST_CASE("vector backends match the scalar reference") {
  Rng rng = make_rng(22, 0);
  const auto& scalar = simd::table(simd::Backend::Scalar);
  const std::vector<KernelSpec> specs{KernelSpec::plummer(3, 3),   KernelSpec::plummer(2, 1),
                                      KernelSpec::plummer(2.5, 0.7), KernelSpec::plummer(1.3, 0.5),
                                      KernelSpec::plummer(40, 2),   KernelSpec::gaussian(1.7)};
  for (auto backend : simd::supported_backends()) {
    if (backend == simd::Backend::Scalar) continue;
    CAPTURE(simd::to_string(backend));
    const auto& vec = simd::table(backend);
    for (const auto& spec : specs) {
      const auto params = simd::make_params(spec);
      for (std::size_t m : {1u, 2u, 3u, 5u, 16u, 17u}) {
        for (std::size_t count : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 37u, 128u}) {
          const Matrix src = testing::random_points(rng, count, m, 2.0);
          const Matrix a = testing::random_points(rng, 1, m, 2.0);
          const PackedPoints packed(src);
          std::vector<double> g1(m, 99.0), g2(m, -99.0);
          const double s1 = scalar.kernel_sum(&params, a.data(), packed.data(), count, m, g1.data());
          const double s2 = vec.kernel_sum(&params, a.data(), packed.data(), count, m, g2.data());
          CHECK(testing::rel_err(s1, s2) < 1e-13);
          CHECK(testing::rel_err(g1, g2) < 1e-12);
          CHECK(vec.kernel_sum(&params, a.data(), packed.data(), count, m, nullptr) == s2);
        }
      }
    }
  }
}

TEST_CASE("gemm backends match the scalar reference") {
  Rng rng = make_rng(23, 0);
  std::uniform_int_distribution<std::size_t> dim(1, 41);
  const auto& scalar = simd::table(simd::Backend::Scalar);
  for (auto backend : simd::supported_backends()) {
    const auto& vec = simd::table(backend);
    CAPTURE(simd::to_string(backend));
    for (int t = 0; t < 200; ++t) {
      const std::size_t m = dim(rng), n = dim(rng), k = dim(rng);
      const bool transposed = t % 2 == 1;
      const Matrix a = testing::random_points(rng, transposed ? k : m, transposed ? m : k);
      const Matrix b = testing::random_points(rng, k, n);
      const Matrix c0 = testing::random_points(rng, m, n);
      const std::size_t rs = transposed ? 1 : k, cs = transposed ? m : 1;
      const int accumulate = t % 3 == 0;
      Matrix c1 = c0, c2 = c0;
      scalar.gemm(m, n, k, a.data(), rs, cs, b.data(), c1.data(), accumulate);
      vec.gemm(m, n, k, a.data(), rs, cs, b.data(), c2.data(), accumulate);
      // Naive oracle with its own loop order.
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          double s = accumulate ? c0(i, j) : 0.0, mag = std::abs(s);
          for (std::size_t q = 0; q < k; ++q) {
            const double term = a.data()[i * rs + q * cs] * b(q, j);
            s += term;
            mag += std::abs(term);
          }
          CHECK(std::abs(c1(i, j) - s) <= 1e-14 * mag);
          CHECK(std::abs(c2(i, j) - s) <= 1e-14 * mag);
        }
      }
    }
  }
}

TEST_CASE("each backend is deterministic") {
  Rng rng = make_rng(24, 0);
  const Matrix src = testing::random_points(rng, 301, 2, 3.0);
  const PackedPoints packed(src);
  const auto params = simd::make_params(KernelSpec::plummer(3, 3));
  const double a[2] = {0.3, -0.4};
  for (auto backend : simd::supported_backends()) {
    const auto& t = simd::table(backend);
    double g1[2], g2[2];
    const double s1 = t.kernel_sum(&params, a, packed.data(), packed.count(), 2, g1);
    const double s2 = t.kernel_sum(&params, a, packed.data(), packed.count(), 2, g2);
    CHECK(s1 == s2);
    CHECK(g1[0] == g2[0]);
    CHECK(g1[1] == g2[1]);
  }
}

TEST_CASE("estimators agree across backends") {
  Scoped keep;
  Rng rng = make_rng(25, 0);
  const Batch batch{testing::random_points(rng, 40, 2), testing::random_points(rng, 33, 2, 1.0, 0.5)};
  const auto spec = KernelSpec::plummer(3, 3);
  simd::set_active_backend(simd::Backend::Scalar);
  const double f_ref = energy_hat(batch, spec);
  const Matrix e_ref = field_hat_many(batch.generated, batch, spec);
  for (auto backend : simd::supported_backends()) {
    simd::set_active_backend(backend);
    CHECK(testing::rel_err(energy_hat(batch, spec), f_ref) < 1e-12);
    CHECK(testing::rel_err(field_hat_many(batch.generated, batch, spec).values(), e_ref.values()) < 1e-12);
  }
}
