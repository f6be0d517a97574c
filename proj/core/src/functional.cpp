#include "choq/functional.hpp"

#include <cmath>

#include "choq/fft.hpp"

namespace choq {

namespace {

double dot_quadrature(const ScalarField& f, const ScalarField& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f.values[i] * g.values[i];
  return s * f.grid.cell_volume();
}

// density = w_const * (weight?) * |u|^p
ScalarField power_density(const ScalarField& u, double p, double w_const,
                          const ScalarField* weight) {
  ScalarField d(u.grid);
  if (p == 2.0) {
    for (std::size_t i = 0; i < u.size(); ++i) d.values[i] = u.values[i] * u.values[i];
  } else {
    for (std::size_t i = 0; i < u.size(); ++i) d.values[i] = std::pow(std::abs(u.values[i]), p);
  }
  if (weight) {
    if (!(weight->grid == u.grid))
      throw std::invalid_argument("power_density: weight grid mismatch");
    for (std::size_t i = 0; i < d.size(); ++i) d.values[i] *= w_const * weight->values[i];
  } else if (w_const != 1.0) {
    for (std::size_t i = 0; i < d.size(); ++i) d.values[i] *= w_const;
  }
  return d;
}

}  // namespace

double signed_power(double u, double q) {
  if (q == 1.0) return u;
  return std::copysign(std::pow(std::abs(u), q), u);
}

double mass_critical_exponent(int dim, double mu) { return (2.0 * dim - mu + 2.0) / dim; }

void validate_params(const ChoquardParams& params) {
  const double N = params.dim;
  if (params.dim < 3) throw std::invalid_argument("params: dim must be >= 3");
  if (!(params.mu > 0.0) || !(params.mu < N))
    throw std::invalid_argument("params: mu must lie in (0, dim)");
  if (!(params.b > 0.0)) throw std::invalid_argument("params: b must be positive");
  if (!(params.a > 0.0)) throw std::invalid_argument("params: a must be positive");
  const double lo = (2.0 * N - params.mu) / N;
  const double hi = (2.0 * N - params.mu) / (N - 2.0);
  if (!(params.p > lo) || !(params.p < hi))
    throw std::invalid_argument("params: p outside the admissible window (" +
                                std::to_string(lo) + ", " + std::to_string(hi) + ")");
  const double pc = mass_critical_exponent(params.dim, params.mu);
  if (std::abs(params.p - pc) < 1e-3)
    throw std::invalid_argument(
        "params: p is excluded near the mass-critical exponent " + std::to_string(pc));
}

Regime regime_of(const ChoquardParams& params) {
  return params.p < mass_critical_exponent(params.dim, params.mu) ? Regime::subcritical
                                                                  : Regime::supercritical;
}

double dilation_exponent(const ChoquardParams& params) {
  return params.dim * params.p - 2.0 * params.dim + params.mu;
}

double nonlocal_term(const ScalarField& u, const ChoquardParams& params, bool* flagged) {
  validate_params(params);
  ScalarField dens = power_density(u, params.p, 1.0, nullptr);
  ConvolveOptions opts;
  opts.flagged = flagged;
  opts.warn_on_boundary = (flagged == nullptr);
  ScalarField conv = riesz_convolve(dens, params.mu, opts);
  return dot_quadrature(dens, conv);
}

Interaction interaction(const ScalarField& u, const ChoquardParams& params,
                        const ScalarField* weight) {
  ScalarField dens = power_density(u, params.p, std::sqrt(params.b), weight);
  Interaction out;
  ConvolveOptions opts;
  opts.flagged = &out.boundary_flagged;
  opts.warn_on_boundary = false;
  out.convolved = riesz_convolve(dens, params.mu, opts);
  out.d_eff = dot_quadrature(dens, out.convolved);
  return out;
}

EnergyBreakdown energy(const ScalarField& u, const ChoquardParams& params,
                       const ScalarField* weight) {
  validate_params(params);
  EnergyBreakdown e;
  e.kinetic = fft::grad_norm_sq(u);
  Interaction inter = interaction(u, params, weight);
  e.nonlocal = inter.d_eff / params.b;
  e.energy = 0.5 * e.kinetic - inter.d_eff / (2.0 * params.p);
  e.pohozaev = e.kinetic - dilation_exponent(params) * inter.d_eff / (2.0 * params.p);
  return e;
}

double lagrange_multiplier(const ScalarField& u, const ChoquardParams& params,
                           const ScalarField* weight) {
  validate_params(params);
  const double m = mass(u);
  if (m < 1e-12) throw std::invalid_argument("lagrange_multiplier: degenerate field, mass < 1e-12");
  const double K = fft::grad_norm_sq(u);
  Interaction inter = interaction(u, params, weight);
  return (inter.d_eff - K) / m;
}

double el_residual(const ScalarField& u, double lambda, const ChoquardParams& params,
                   const ScalarField* weight) {
  validate_params(params);
  if (mass(u) == 0.0) return 0.0;
  Interaction inter = interaction(u, params, weight);
  ScalarField lap = fft::neg_laplacian(u);
  const double w_const = std::sqrt(params.b);
  const double q = params.p - 1.0;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double lin = lap.values[i] + lambda * u.values[i];
    const double w = w_const * (weight ? weight->values[i] : 1.0);
    const double nl = w * inter.convolved.values[i] * signed_power(u.values[i], q);
    num += (lin - nl) * (lin - nl);
    den += lin * lin;
  }
  if (den == 0.0) return 0.0;
  return std::sqrt(num / den);
}

ScalarField energy_gradient(const ScalarField& u, const ChoquardParams& params,
                            const ScalarField* weight) {
  validate_params(params);
  Interaction inter = interaction(u, params, weight);
  ScalarField grad = fft::neg_laplacian(u);
  const double w_const = std::sqrt(params.b);
  const double q = params.p - 1.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = w_const * (weight ? weight->values[i] : 1.0);
    grad.values[i] -= w * inter.convolved.values[i] * signed_power(u.values[i], q);
  }
  return grad;
}

}  // namespace choq
