#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "coulomb/error.hpp"
#include "coulomb/mixture.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace coulomb;

namespace {

bool has_center(const MixtureSpec& spec, double x, double y) {
  for (std::size_t k = 0; k < spec.components(); ++k)
    if (spec.centers(k, 0) == x && spec.centers(k, 1) == y) return true;
  return false;
}

}  // namespace

TEST_CASE("grid mixture layout") {
  const MixtureSpec g = grid_mixture_25();
  REQUIRE(g.components() == 25);
  CHECK(g.dim() == 2);
  CHECK(g.component_std == 1.0);
  CHECK(has_center(g, -21, -21));
  CHECK(has_center(g, 21, 21));
  CHECK(has_center(g, 0, 0));
  CHECK(has_center(g, -10.5, 10.5));
  double closest = 1e300;
  for (std::size_t a = 0; a < 25; ++a) {
    CHECK(g.weights[a] == doctest::Approx(0.04));
    for (std::size_t b = a + 1; b < 25; ++b)
      closest = std::min(closest, std::hypot(g.centers(a, 0) - g.centers(b, 0), g.centers(a, 1) - g.centers(b, 1)));
  }
  CHECK(closest == 10.5);
}

TEST_CASE("spec validation") {
  MixtureSpec s = grid_mixture_25();
  s.weights.pop_back();
  CHECK_THROWS_AS(s.validate(), InputError);
  s = grid_mixture_25();
  s.weights[0] += 0.1;
  CHECK_THROWS_AS(s.validate(), InputError);
  s = grid_mixture_25();
  s.component_std = -1.0;
  CHECK_THROWS_AS(s.validate(), InputError);
  CHECK_THROWS_AS(MixtureSpec::uniform(Matrix(0, 2), 1.0), InputError);
}

TEST_CASE("mixture sampling statistics") {
  const MixtureSpec g = grid_mixture_25();
  const Matrix x = sample_mixture(g, 100000, 5);
  CHECK(x.rows() == 100000);
  CHECK(sample_mixture(g, 100000, 5) == x);
  CHECK_FALSE(sample_mixture(g, 100, 6) == sample_mixture(g, 100, 5));

  const ModeReport r = assign_modes(x, g);
  for (long c : r.per_mode_count) CHECK(std::abs(c / 100000.0 - 0.04) <= 0.025);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    mx += x(i, 0);
    my += x(i, 1);
  }
  CHECK(std::abs(mx / 1e5) < 0.2);
  CHECK(std::abs(my / 1e5) < 0.2);

  // Radius-3 truncation of a unit 2-D Gaussian: E[r^2] = 2 - 9 e^-4.5 / (1 - e^-4.5).
  const double truncated = std::sqrt((2.0 - 9.0 * std::exp(-4.5) / (1.0 - std::exp(-4.5))) / 2.0);
  for (double s : r.per_mode_std) CHECK(s == doctest::Approx(truncated).epsilon(0.05));

  MixtureSpec sharp = g;
  sharp.component_std = 0.0;
  const Matrix on = sample_mixture(sharp, 200, 7);
  for (std::size_t i = 0; i < on.rows(); ++i) CHECK(has_center(g, on(i, 0), on(i, 1)));
}

TEST_CASE("mode assignment") {
  const MixtureSpec g = grid_mixture_25();
  const ModeReport exact = assign_modes(g.centers, g);
  CHECK(exact.unassigned_fraction == 0.0);
  CHECK(exact.modes_covered == 25);
  CHECK(exact.high_quality_fraction == 1.0);
  for (long c : exact.per_mode_count) CHECK(c == 1);
  for (double s : exact.per_mode_std) CHECK(s == 0.0);

  const Matrix off = Matrix::from_rows({{3.0001, 0.0}, {2.9999, 0.0}, {5.25, 5.25}});
  const ModeReport b = assign_modes(off, g);
  CHECK(b.per_mode_count[12] == 1);
  CHECK(b.unassigned_fraction == doctest::Approx(2.0 / 3.0));
  CHECK(b.total == 3);
  CHECK(b.modes_covered == 1);

  const Matrix target = sample_mixture(g, 10000, 8);
  const ModeReport t = assign_modes(target, g);
  CHECK(std::abs(t.high_quality_fraction - (1.0 - std::exp(-4.5))) <= 0.01);
  CHECK(t.modes_covered == 25);
  const long assigned = std::accumulate(t.per_mode_count.begin(), t.per_mode_count.end(), 0L);
  CHECK(assigned + std::lround(t.unassigned_fraction * t.total) == t.total);

  // Coverage threshold: one mode with fewer than 1% of the samples.
  Matrix lopsided(0, 2);
  for (int i = 0; i < 995; ++i) lopsided.append_row(std::vector<double>{0.0, 0.0});
  for (int i = 0; i < 5; ++i) lopsided.append_row(std::vector<double>{21.0, 21.0});
  CHECK(assign_modes(lopsided, g).modes_covered == 1);

  CHECK_THROWS_AS(assign_modes(Matrix(3, 3), g), InputError);
  CHECK_THROWS_AS(assign_modes(target, g, 0.0), InputError);
}

TEST_CASE("histogram jensen-shannon divergence") {
  const Box2D box;
  const MixtureSpec g = grid_mixture_25();
  const Matrix a = sample_mixture(g, 10000, 11);
  const Matrix b = sample_mixture(g, 10000, 12);
  CHECK(hist2d_jsd(a, a, box, 50) == 0.0);
  const double same = hist2d_jsd(a, b, box, 50);
  CHECK(same > 0.0);
  CHECK(same < 0.15);
  CHECK(hist2d_jsd(b, a, box, 50) == doctest::Approx(same).epsilon(1e-12));

  const Matrix left = Matrix::from_rows({{-20, -20}});
  const Matrix right = Matrix::from_rows({{20, 20}});
  CHECK(hist2d_jsd(left, right, box, 50) == doctest::Approx(1.0).epsilon(1e-12));
  // Out-of-range mass lands in the boundary bin.
  CHECK(hist2d_jsd(Matrix::from_rows({{-24.9, 24.9}}), Matrix::from_rows({{-100, 100}}), box, 50) == 0.0);

  // Half overlap: P = (1/2, 1/2, 0), Q = (0, 1/2, 1/2) gives JSD = 1/2 bit.
  const Matrix p = Matrix::from_rows({{-20, 0}, {0, 0}});
  const Matrix q = Matrix::from_rows({{0, 0}, {20, 0}});
  CHECK(hist2d_jsd(p, q, box, 50) == doctest::Approx(0.5).epsilon(1e-12));

  // Row order does not matter.
  Matrix shuffled(0, 2);
  std::vector<std::size_t> idx(a.rows());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = make_rng(13, Stream::Eval);
  std::shuffle(idx.begin(), idx.end(), rng);
  for (std::size_t i : idx) shuffled.append_row(a.row(i));
  CHECK(hist2d_jsd(shuffled, b, box, 50) == same);

  const Matrix wide = sample_mixture(MixtureSpec::gaussian(Point{0.0, 0.0}, 15.0), 10000, 14);
  const double diff = hist2d_jsd(a, wide, box, 50);
  CHECK(diff > same);
  CHECK(diff <= 1.0);

  CHECK_THROWS_AS(hist2d_jsd(Matrix(0, 2), b, box, 50), InputError);
  CHECK_THROWS_AS(hist2d_jsd(a, b, box, 1), InputError);
  CHECK_THROWS_AS(hist2d_jsd(a, Matrix(4, 3), box, 50), InputError);
}
