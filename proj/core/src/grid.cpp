#include "choq/grid.hpp"

#include <cmath>

namespace choq {

std::size_t GridSpec::total_points() const {
  std::size_t n = 1;
  for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(points_per_axis);
  return n;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int d = 0; d < dim; ++d) v *= spacing;
  return v;
}

GridSpec make_grid(int dim, int points_per_axis, double half_width) {
  if (dim < 3)
    throw std::invalid_argument("make_grid: dim must be >= 3, got " + std::to_string(dim));
  // even (origin at index n/2) and FFT-friendly: prime factors in {2,3,5,7}
  int rest = points_per_axis;
  for (int f : {2, 3, 5, 7})
    while (rest % f == 0) rest /= f;
  if (points_per_axis < 8 || points_per_axis % 2 != 0 || rest != 1)
    throw std::invalid_argument(
        "make_grid: points_per_axis must be even, >= 8, with prime factors in {2,3,5,7}, got " +
        std::to_string(points_per_axis));
  if (!(half_width > 0.0))
    throw std::invalid_argument("make_grid: half_width must be positive");
  GridSpec g;
  g.dim = dim;
  g.points_per_axis = points_per_axis;
  g.half_width = half_width;
  g.spacing = 2.0 * half_width / points_per_axis;
  return g;
}

void decode_index(const GridSpec& g, std::size_t flat, int* idx) {
  const std::size_t n = static_cast<std::size_t>(g.points_per_axis);
  for (int d = g.dim - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(flat % n);
    flat /= n;
  }
}

double integrate(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.cell_volume();
}

double mass(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v * v;
  return s * f.grid.cell_volume();
}

double lq_norm(const ScalarField& f, double q) {
  double s = 0.0;
  for (double v : f.values) s += std::pow(std::abs(v), q);
  return std::pow(s * f.grid.cell_volume(), 1.0 / q);
}

double boundary_shell_mass_fraction(const ScalarField& f) {
  const GridSpec& g = f.grid;
  const int n = g.points_per_axis;
  double total = 0.0, shell = 0.0;
  std::vector<int> idx(g.dim);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double v2 = f.values[i] * f.values[i];
    total += v2;
    decode_index(g, i, idx.data());
    for (int d = 0; d < g.dim; ++d) {
      if (idx[d] < 2 || idx[d] >= n - 2) {
        shell += v2;
        break;
      }
    }
  }
  return total > 0.0 ? shell / total : 0.0;
}

void check_finite(const ScalarField& f, const std::string& what) {
  for (double v : f.values)
    if (!std::isfinite(v)) throw std::runtime_error(what + ": field contains non-finite values");
}

ScalarField gaussian_field(const GridSpec& g, const std::vector<double>& center,
                           double width, double amplitude) {
  if (center.size() != static_cast<std::size_t>(g.dim))
    throw std::invalid_argument("gaussian_field: center dimension mismatch");
  ScalarField f(g);
  std::vector<int> idx(g.dim);
  const double inv_w2 = 1.0 / (width * width);
  for (std::size_t i = 0; i < f.size(); ++i) {
    decode_index(g, i, idx.data());
    double r2 = 0.0;
    for (int d = 0; d < g.dim; ++d) {
      const double x = g.coord(idx[d]) - center[d];
      r2 += x * x;
    }
    f.values[i] = amplitude * std::exp(-r2 * inv_w2);
  }
  return f;
}

double bump_profile(double t) {
  const double t2 = t * t;
  if (t2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t2));
}

ScalarField bump_field(const GridSpec& g, const std::vector<double>& center,
                       double width, double amplitude) {
  if (center.size() != static_cast<std::size_t>(g.dim))
    throw std::invalid_argument("bump_field: center dimension mismatch");
  if (!(width > 0.0)) throw std::invalid_argument("bump_field: width must be positive");
  ScalarField f(g);
  std::vector<int> idx(g.dim);
  for (std::size_t i = 0; i < f.size(); ++i) {
    decode_index(g, i, idx.data());
    double r2 = 0.0;
    for (int d = 0; d < g.dim; ++d) {
      const double x = g.coord(idx[d]) - center[d];
      r2 += x * x;
    }
    f.values[i] = amplitude * bump_profile(std::sqrt(r2) / width);
  }
  return f;
}

ScalarField scaled(const ScalarField& f, double c) {
  ScalarField r = f;
  for (double& v : r.values) v *= c;
  return r;
}

ScalarField added(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("added: grid mismatch");
  ScalarField r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r.values[i] += b.values[i];
  return r;
}

}  // namespace choq
