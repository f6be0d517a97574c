#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "choq/riesz.hpp"
#include "oracles.hpp"

using namespace choq;

namespace {

std::size_t origin_index(const GridSpec& g) {
  std::size_t f = 0;
  for (int d = 0; d < g.dim; ++d) f = f * g.points_per_axis + g.points_per_axis / 2;
  return f;
}

}  // namespace

TEST_CASE("kernel table validation and caching") {
  GridSpec g = make_grid(3, 32, 8.0);
  CHECK_THROWS_AS(riesz_kernel_table(g, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(riesz_kernel_table(g, 3.0), std::invalid_argument);
  auto t1 = riesz_kernel_table(g, 1.0);
  auto t2 = riesz_kernel_table(g, 1.0);
  CHECK(t1.get() == t2.get());  // process-wide cache

  // one table serves every dilated copy of the grid
  GridSpec g2 = make_grid(3, 32, 4.0);
  auto t3 = riesz_kernel_table(g2, 1.0);
  CHECK(t1.get() == t3.get());
}

TEST_CASE("coulomb convolution of a gaussian: value 2 pi at the origin") {
  GridSpec g = make_grid(3, 64, 16.0);
  ScalarField f = gaussian_field(g, {0.0, 0.0, 0.0}, 1.0);
  ScalarField conv = riesz_convolve(f, 1.0);
  CHECK(conv.values[origin_index(g)] == doctest::Approx(2.0 * M_PI).epsilon(1e-3));
}

TEST_CASE("coulomb convolution matches the radial shell formula off-center") {
  GridSpec g = make_grid(3, 64, 16.0);
  ScalarField f = gaussian_field(g, {0.0, 0.0, 0.0}, 1.0);
  ScalarField conv = riesz_convolve(f, 1.0);
  auto gauss = [](double r) { return std::exp(-r * r); };
  for (double x : {0.5, 1.0, 2.0, 4.0}) {
    const int i = g.points_per_axis / 2 + static_cast<int>(x / g.spacing);
    std::size_t flat = i;
    for (int d = 1; d < 3; ++d) flat = flat * g.points_per_axis + g.points_per_axis / 2;
    const double expect = oracle::coulomb_radial_3d(gauss, x, 14.0);
    CHECK(conv.values[flat] == doctest::Approx(expect).epsilon(2e-3));
  }
}

TEST_CASE("general exponent matches the origin quadrature oracle") {
  GridSpec g = make_grid(3, 64, 16.0);
  ScalarField f = gaussian_field(g, {0.0, 0.0, 0.0}, 1.0);
  auto gauss = [](double r) { return std::exp(-r * r); };
  for (double mu : {0.5, 1.5, 2.0}) {
    ScalarField conv = riesz_convolve(f, mu);
    const double expect = oracle::riesz_at_origin_3d(gauss, mu, 14.0);
    CHECK(conv.values[origin_index(g)] == doctest::Approx(expect).epsilon(5e-3));
  }
}

TEST_CASE("convolution refines toward the oracle") {
  auto gauss = [](double r) { return std::exp(-r * r); };
  const double expect = 2.0 * M_PI;
  double err_prev = 1.0;
  for (int n : {32, 64}) {
    GridSpec g = make_grid(3, n, 16.0);
    ScalarField f = gaussian_field(g, {0.0, 0.0, 0.0}, 1.0);
    ScalarField conv = riesz_convolve(f, 1.0);
    const double err = std::abs(conv.values[origin_index(g)] / expect - 1.0);
    CHECK(err < err_prev);
    err_prev = err;
  }
  (void)gauss;
}

TEST_CASE("translation covariance") {
  GridSpec g = make_grid(3, 64, 16.0);
  ScalarField f0 = gaussian_field(g, {0.0, 0.0, 0.0}, 1.0);
  ScalarField f1 = gaussian_field(g, {2.0, 0.0, 0.0}, 1.0);
  ScalarField c0 = riesz_convolve(f0, 1.0);
  ScalarField c1 = riesz_convolve(f1, 1.0);
  // value at x over the shifted source equals value at x - shift over the original
  const int n = g.points_per_axis;
  const int mid = n / 2;
  const int off = static_cast<int>(2.0 / g.spacing);
  auto at = [&](const ScalarField& u, int i) {
    return u.values[(static_cast<std::size_t>(i) * n + mid) * n + mid];
  };
  CHECK(at(c1, mid + off) == doctest::Approx(at(c0, mid)).epsilon(1e-6));
}

TEST_CASE("boundary flag fires for truncated data") {
  GridSpec g = make_grid(3, 32, 8.0);
  ScalarField wide = gaussian_field(g, {0.0, 0.0, 0.0}, 10.0);
  bool flagged = false;
  ConvolveOptions opts;
  opts.flagged = &flagged;
  opts.warn_on_boundary = false;
  riesz_convolve(wide, 1.0, opts);
  CHECK(flagged);

  flagged = false;
  ScalarField tight = gaussian_field(g, {0.0, 0.0, 0.0}, 1.0);
  riesz_convolve(tight, 1.0, opts);
  CHECK_FALSE(flagged);
}
