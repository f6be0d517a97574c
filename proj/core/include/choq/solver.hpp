#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "choq/functional.hpp"

namespace choq {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  double time_step = 0.05;       // gradient-flow pseudo-time step
  int max_iterations = 50000;
  double energy_tol = 1e-10;     // relative energy change per step
  double residual_tol = 1e-6;    // Euler-Lagrange residual
  double fiber_tol = 1e-12;      // Pohozaev projection skip threshold
  int check_every = 1;           // residual evaluation cadence
  int anderson_depth = 5;        // mixing history; 0 = plain damped flow
  bool record_trace = true;

  void validate() const;
};

struct TraceRow {
  int iteration;
  double energy;
  double residual;
  double mass_drift;
};

struct GroundStateResult {
  ScalarField field;
  double lambda = 0.0;
  EnergyBreakdown breakdown;
  int iterations = 0;
  bool converged = false;
  Regime regime = Regime::subcritical;
  std::vector<TraceRow> trace;
  double boundary_fraction = 0.0;
};

/// Gaussian seed exp(-|x-center|^2/width^2) rescaled to mass a.
ScalarField initial_guess(const GridSpec& grid, const ChoquardParams& params,
                          const std::vector<double>& center, double width);

/// Exact representation of t^{N/2} u(t x): same samples scaled by t^{N/2} on
/// the grid with half_width / t. Mass is preserved; K and D pick up their
/// dilation powers exactly.
ScalarField dilate_rescale_grid(const ScalarField& u, double t);

/// Closed-form transport of a ground state between parameter points with the
/// same exponents (dim, mu, p): the exact dilation/amplitude map sending a
/// solution at `from` to the solution at `to`. The output lives on a rescaled
/// grid. Used to seed solves at scaled (b, a) inside the bound-state basin --
/// on small boxes the spread state can undercut the bound one, and a fresh
/// Gaussian seed may drain into it.
ScalarField transport_ground_state(const ScalarField& u, const ChoquardParams& from,
                                   const ChoquardParams& to);

/// Unique mass-preserving dilation onto the Pohozaev manifold (supercritical
/// only, where the fiber t -> E(u_t) has a strict maximum). Closed form:
/// t*^(theta-2) = 2p K / (b theta D), theta = Np - 2N + mu.
std::pair<ScalarField, double> pohozaev_dilate(const ScalarField& u, const ChoquardParams& params);

/// Normalized gradient flow (semi-implicit in -Delta, explicit nonlocal term,
/// exact mass renormalization each step). Optional spatial weight multiplies
/// both sides of the convolution.
GroundStateResult solve_subcritical(const ScalarField& seed, const ChoquardParams& params,
                                    const SolverConfig& cfg,
                                    const ScalarField* weight = nullptr);

/// Manifold-projected descent: mass-tangent gradient step, renormalization,
/// then the closed-form Pohozaev projection, until energy stalls and the
/// residual passes.
GroundStateResult solve_supercritical(const ScalarField& seed, const ChoquardParams& params,
                                      const SolverConfig& cfg);

/// Same scheme with a grid-dependent weight, re-evaluated after each
/// dilation. Used by the semiclassical driver in the supercritical regime.
using WeightEval = std::function<ScalarField(const GridSpec&)>;
GroundStateResult solve_supercritical_weighted(const ScalarField& seed,
                                               const ChoquardParams& params,
                                               const SolverConfig& cfg,
                                               const WeightEval& weight_eval);

}  // namespace choq
