#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace choq {

/// Uniform cubic grid on the box [-half_width, half_width)^dim.
/// Grid points along each axis: x_i = -half_width + i * spacing, i = 0..n-1,
/// so the origin sits at index n/2 (n is even).
struct GridSpec {
  int dim = 3;
  int points_per_axis = 64;
  double half_width = 16.0;
  double spacing = 0.5;

  std::size_t total_points() const;
  double cell_volume() const;
  double coord(int index) const { return -half_width + index * spacing; }

  bool operator==(const GridSpec&) const = default;
};

/// Validated constructor. Rejects dim < 3, odd / FFT-unfriendly / sub-8
/// resolutions, and non-positive box sizes.
GridSpec make_grid(int dim, int points_per_axis, double half_width);

/// Real scalar function sampled on a GridSpec, row-major, axis 0 slowest.
struct ScalarField {
  GridSpec grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g) : grid(g), values(g.total_points(), 0.0) {}

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
};

/// Decode a flat row-major index into per-axis indices (idx must have dim slots).
void decode_index(const GridSpec& g, std::size_t flat, int* idx);

/// Riemann/trapezoid sum on the uniform grid: spacing^dim * sum(values).
double integrate(const ScalarField& f);

/// L2 mass |f|_2^2 = integrate(f^2).
double mass(const ScalarField& f);

/// L^q norm (integrate(|f|^q))^{1/q}.
double lq_norm(const ScalarField& f, double q);

/// Fraction of the mass carried by the boundary shell of width 2*spacing.
/// Used as the decay check in front of free-space convolutions.
double boundary_shell_mass_fraction(const ScalarField& f);

/// Throws if the field contains NaN/Inf.
void check_finite(const ScalarField& f, const std::string& what);

/// Build f(x) = amplitude * exp(-|x - center|^2 / width^2); center has dim entries.
ScalarField gaussian_field(const GridSpec& g, const std::vector<double>& center,
                           double width, double amplitude = 1.0);

/// Standard smooth compactly supported profile: exp(1 - 1/(1 - t^2)) for
/// |t| < 1, zero otherwise. Value 1 at t = 0, C^inf across the support edge.
double bump_profile(double t);

/// f(x) = amplitude * bump_profile(|x - center| / width): compact support in
/// the ball of radius `width` around `center`.
ScalarField bump_field(const GridSpec& g, const std::vector<double>& center,
                       double width, double amplitude = 1.0);

// elementwise helpers (new-field results, inputs untouched)
ScalarField scaled(const ScalarField& f, double c);
ScalarField added(const ScalarField& a, const ScalarField& b);

}  // namespace choq
