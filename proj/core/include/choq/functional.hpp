#pragma once

#include <optional>

#include "choq/grid.hpp"
#include "choq/riesz.hpp"

namespace choq {

/// Exponents and coupling of the single Choquard equation
///   -Delta u + lambda u = b (|x|^{-mu} * |u|^p) |u|^{p-2} u,  |u|_2^2 = a.
struct ChoquardParams {
  int dim = 3;
  double mu = 1.0;
  double p = 2.0;
  double b = 1.0;
  double a = 1.0;
};

/// Admissible exponent window (2N-mu)/N < p < (2N-mu)/(N-2), excluding the
/// mass-critical exponent (2N-mu+2)/N (with a 1e-3 safety margin around it,
/// where the constrained flow degenerates). Throws on violation.
void validate_params(const ChoquardParams& params);

double mass_critical_exponent(int dim, double mu);

enum class Regime { subcritical, supercritical };
Regime regime_of(const ChoquardParams& params);

/// Dilation exponent of the nonlocal term under t^{N/2} u(t x):
/// D scales as t^theta with theta = Np - 2N + mu.
double dilation_exponent(const ChoquardParams& params);

struct EnergyBreakdown {
  double kinetic = 0.0;   // K = int |grad u|^2
  double nonlocal = 0.0;  // D = double integral of |u|^p |u|^p / |x-y|^mu
  double energy = 0.0;    // K/2 - b D / (2p)
  double pohozaev = 0.0;  // K - b theta D / (2p), theta = Np - 2N + mu
  std::optional<double> lambda;
};

/// Raw nonlocal double integral D(u) (no coupling, no weight).
double nonlocal_term(const ScalarField& u, const ChoquardParams& params, bool* flagged = nullptr);

/// One convolution shared by energy, gradient, and residual assembly.
/// The effective weight is sqrt(b) * weight (weight defaults to 1), entering
/// on both sides of the convolution: density = W_eff |u|^p.
struct Interaction {
  ScalarField convolved;  // |x|^{-mu} * density
  double d_eff = 0.0;     // int density * convolved  ( = b*D when weight is 1)
  bool boundary_flagged = false;
};
Interaction interaction(const ScalarField& u, const ChoquardParams& params,
                        const ScalarField* weight = nullptr);

EnergyBreakdown energy(const ScalarField& u, const ChoquardParams& params,
                       const ScalarField* weight = nullptr);

/// lambda = (b D - K) / a from pairing the equation with u.
double lagrange_multiplier(const ScalarField& u, const ChoquardParams& params,
                           const ScalarField* weight = nullptr);

/// Relative L2 residual of the Euler-Lagrange equation,
/// |(-Delta + lambda) u - nonlinearity| / |(-Delta + lambda) u|. Zero field -> 0.
double el_residual(const ScalarField& u, double lambda, const ChoquardParams& params,
                   const ScalarField* weight = nullptr);

/// Unconstrained L2 gradient -Delta u - b W (conv) |u|^{p-2} u. For the
/// sublinear branch p < 2 the nonlinearity is sign(u)|u|^{p-1}, continuous
/// for p > 1 without any mollification.
ScalarField energy_gradient(const ScalarField& u, const ChoquardParams& params,
                            const ScalarField* weight = nullptr);

/// sign(u)|u|^{q}, the regularized power used throughout.
double signed_power(double u, double q);

}  // namespace choq
