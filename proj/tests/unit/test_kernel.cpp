#include <cmath>
#include <random>
#include <vector>

#include "coulomb/error.hpp"
#include "coulomb/kernel.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace coulomb;
using testing::rel_err;

namespace {

std::vector<double> offset(std::size_t m, double r, coulomb::Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(m);
  double n2 = 0.0;
  for (double& x : v) {
    x = normal(rng);
    n2 += x * x;
  }
  for (double& x : v) x *= r / std::sqrt(n2);
  return v;
}

}  // namespace

TEST_CASE("kernel value examples") {
  const std::vector<double> a{0.3, -1.2};
  CHECK(kernel_value(a, a, KernelSpec::plummer(3, 1)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(kernel_value(a, a, KernelSpec::plummer(3, 2)) == doctest::Approx(0.125).epsilon(1e-15));
  // |a-b|^2 = 3
  const std::vector<double> p{1, 1, 1}, q{0, 0, 0};
  CHECK(kernel_value(p, q, KernelSpec::plummer(2, 1)) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(kernel_value(p, q, KernelSpec::gaussian(1.0)) == doctest::Approx(std::exp(-1.5)).epsilon(1e-15));
}

TEST_CASE("kernel gradient examples") {
  const auto spec = KernelSpec::plummer(2, 1);
  const std::vector<double> a{0.5, 2.0};
  const auto zero = kernel_grad(a, a, spec);
  CHECK(zero[0] == 0.0);
  CHECK(zero[1] == 0.0);

  // a - b = (1, 0); oracle is a finite difference of kernel_value.
  const std::vector<double> b{-0.5, 2.0};
  const auto g = kernel_grad(a, b, spec);
  const auto fd = testing::fd_gradient([&](std::span<const double> x) { return kernel_value(x, b, spec); },
                                       testing::to_vector(a), 1e-5);
  CHECK(fd[0] == doctest::Approx(-0.5).epsilon(1e-8));
  CHECK(g[0] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(g[1] == 0.0);

  // k grows toward b: the gradient is a positive multiple of (b - a).
  Rng rng = make_rng(11, 0);
  for (int t = 0; t < 20; ++t) {
    const auto pa = testing::random_points(rng, 1, 3);
    const auto pb = testing::random_points(rng, 1, 3);
    const auto grad = kernel_grad(pa.row(0), pb.row(0), KernelSpec::plummer(1.5, 0.7));
    double dot = 0.0, gn = 0.0, dn = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double dir = pb(0, c) - pa(0, c);
      dot += grad[c] * dir;
      gn += grad[c] * grad[c];
      dn += dir * dir;
    }
    CHECK(dot / std::sqrt(gn * dn) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("kernel laplacian examples") {
  const std::vector<double> origin5(5, 0.0);
  CHECK(kernel_laplacian(origin5, origin5, KernelSpec::plummer(3, 1), 5) == doctest::Approx(-15.0).epsilon(1e-14));

  // r = 1, m = 3, d = 1, eps = 1; oracle is the numeric Hessian trace.
  const auto spec = KernelSpec::plummer(1, 1);
  const std::vector<double> a{1.0, 0.0, 0.0}, b{0.0, 0.0, 0.0};
  const double fd = testing::fd_laplacian([&](std::span<const double> x) { return kernel_value(x, b, spec); },
                                          a, 1e-3);
  CHECK(fd == doctest::Approx(-3.0 * std::pow(2.0, -2.5)).epsilon(1e-8));
  CHECK(kernel_laplacian(a, b, spec, 3) == doctest::Approx(-0.5303300859).epsilon(1e-9));

  Rng rng = make_rng(12, 0);
  const std::vector<double> zero4(4, 0.0);
  for (double r = 0.0; r < 20.0; r += 0.37)
    CHECK(kernel_laplacian(offset(4, r, rng), zero4, KernelSpec::plummer(2, 1), 4) < 0.0);
}

TEST_CASE("kernel errors") {
  const std::vector<double> a{0, 0}, b{0, 0, 0};
  const auto spec = KernelSpec::plummer(2, 1);
  CHECK_THROWS_AS(kernel_value(a, b, spec), InputError);
  CHECK_THROWS_AS(kernel_grad(a, b, spec), InputError);
  CHECK_THROWS_AS(kernel_laplacian(a, a, spec, 3), InputError);
  CHECK_THROWS_AS(kernel_value(a, a, KernelSpec::plummer(2, 0.0)), InputError);
  CHECK_THROWS_AS(kernel_value(a, a, KernelSpec::plummer(-1, 1.0)), InputError);
  CHECK_THROWS_AS(KernelSpec::plummer(2, std::nan("")).validate(), InputError);
  CHECK_THROWS_AS(parse_kernel_family("cauchy"), InputError);
  CHECK(parse_kernel_family("gaussian") == KernelFamily::Gaussian);
  CHECK(to_string(KernelFamily::Plummer) == "plummer");
}

TEST_CASE("symmetry and antisymmetry") {
  Rng rng = make_rng(13, 0);
  std::uniform_real_distribution<double> u(0.2, 4.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 1 + t % 6;
    const auto pts = testing::random_points(rng, 2, m, 2.0);
    const auto spec = t % 4 == 3 ? KernelSpec::gaussian(u(rng)) : KernelSpec::plummer(u(rng), u(rng));
    CHECK(kernel_value(pts.row(0), pts.row(1), spec) == kernel_value(pts.row(1), pts.row(0), spec));
    const auto g1 = kernel_grad(pts.row(0), pts.row(1), spec);
    const auto g2 = kernel_grad(pts.row(1), pts.row(0), spec);
    for (std::size_t c = 0; c < m; ++c) CHECK(g1[c] == -g2[c]);
  }
}

TEST_CASE("gradient matches finite differences") {
  Rng rng = make_rng(14, 0);
  std::uniform_real_distribution<double> u(0.3, 3.0);
  const std::size_t dims[] = {1, 2, 5};
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = dims[t % 3];
    const auto pts = testing::random_points(rng, 2, m, 1.5);
    const auto spec = t % 10 == 9 ? KernelSpec::gaussian(1.0 + u(rng)) : KernelSpec::plummer(u(rng), u(rng));
    double r2 = 0.0;
    for (std::size_t c = 0; c < m; ++c) r2 += std::pow(pts(0, c) - pts(1, c), 2);
    const double h = 1e-4 * (1.0 + std::sqrt(r2));
    const auto b = testing::to_vector(pts.row(1));
    const auto fd = testing::fd_gradient([&](std::span<const double> x) { return kernel_value(x, b, spec); },
                                         testing::to_vector(pts.row(0)), h);
    CHECK(rel_err(kernel_grad(pts.row(0), pts.row(1), spec), fd) < 1e-6);
  }
}

TEST_CASE("laplacian matches the numeric hessian trace") {
  Rng rng = make_rng(15, 0);
  std::uniform_real_distribution<double> u(0.3, 3.0);
  const std::size_t dims[] = {1, 2, 5};
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = dims[t % 3];
    const auto pts = testing::random_points(rng, 2, m, 1.5);
    const auto spec = t % 10 == 9 ? KernelSpec::gaussian(1.0 + u(rng)) : KernelSpec::plummer(u(rng), u(rng));
    const auto b = testing::to_vector(pts.row(1));
    const double fd = testing::fd_laplacian([&](std::span<const double> x) { return kernel_value(x, b, spec); },
                                            testing::to_vector(pts.row(0)), 1e-3 * spec.epsilon);
    CHECK(rel_err(kernel_laplacian(pts.row(0), pts.row(1), spec, static_cast<int>(m)), fd) < 1e-4);
  }
}

TEST_CASE("laplacian minimum and negativity for d <= m - 2") {
  Rng rng = make_rng(16, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const int m = 3 + t % 6;
    const double d = 0.1 + (m - 2.1) * u(rng);
    const double eps = 0.2 + 3.0 * u(rng);
    const auto spec = KernelSpec::plummer(d, eps);
    const std::vector<double> zero(m, 0.0);
    const double minimum = -m * d * std::pow(eps, -(d + 2));
    CHECK(rel_err(kernel_laplacian(zero, zero, spec, m), minimum) < 1e-10);
    for (int i = 0; i < 200; ++i) {
      const double r = 30.0 * u(rng);
      const double lap = kernel_laplacian(offset(m, r, rng), zero, spec, m);
      CHECK(lap < 0.0);
      CHECK(lap >= minimum * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("laplacian at r = 0 rises toward zero as epsilon grows") {
  for (int m = 3; m <= 7; ++m) {
    for (double d = 0.5; d <= m - 2; d += 0.5) {
      const std::vector<double> zero(m, 0.0);
      double prev = -INFINITY;
      for (double eps = 0.1; eps < 10.0; eps *= 1.3) {
        const double lap = kernel_laplacian(zero, zero, KernelSpec::plummer(d, eps), m);
        CHECK(lap > prev);
        CHECK(lap < 0.0);
        prev = lap;
      }
    }
  }
}

TEST_CASE("radial forms agree with the point functions") {
  const auto spec = KernelSpec::plummer(2.5, 0.8);
  for (double r = 0.0; r < 6.0; r += 0.5) {
    const std::vector<double> a{r, 0.0, 0.0}, b{0.0, 0.0, 0.0};
    CHECK(radial_value(r, spec) == kernel_value(a, b, spec));
    CHECK(radial_grad_norm(r, spec) == doctest::Approx(std::abs(kernel_grad(a, b, spec)[0])).epsilon(1e-14));
    CHECK(radial_laplacian(r, spec, 3) == kernel_laplacian(a, b, spec, 3));
  }
}

TEST_CASE("theory regime violations are counted") {
  CHECK(within_theory_regime(KernelSpec::plummer(1, 1), 3));
  CHECK_FALSE(within_theory_regime(KernelSpec::plummer(3, 1), 2));
  CHECK_FALSE(within_theory_regime(KernelSpec::gaussian(1), 5));
  set_theory_warnings_enabled(false);
  CHECK(note_theory_condition(KernelSpec::plummer(3, 3), 2));
  CHECK_FALSE(note_theory_condition(KernelSpec::plummer(1, 3), 3));
  set_theory_warnings_enabled(true);
  const int before = theory_warning_count();
  note_theory_condition(KernelSpec::plummer(3, 3), 2);
  note_theory_condition(KernelSpec::plummer(3, 3), 2);
  CHECK(theory_warning_count() == before + 2);
}
