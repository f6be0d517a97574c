#pragma once

#include <string>
#include <vector>

#include "choq/solver.hpp"

namespace choq {

/// One localized maximum of the trapping potential: a compact smooth bump of
/// peak value `height` on top of the background, supported in the ball of
/// radius `width` around `center`, with its designated attraction domain
/// Omega_i = ball(center, domain_radius). The domain only needs to isolate the
/// peak (heights exceed the potential on its boundary); the support may extend
/// beyond it, as long as supports of different bumps stay disjoint.
struct BumpSpec {
  std::vector<double> center;
  double height = 1.0;
  double width = 1.0;
  double domain_radius = 1.0;
};

/// Q(x) = background + sum_i (height_i - background) * profile(|x-a_i|/w_i);
/// continuous, positive, bounded, with Q(a_i) = height_i exactly and the
/// strict peak condition height_i > max on the domain boundary.
struct PotentialSpec {
  double background = 0.5;
  std::vector<BumpSpec> bumps;

  int k() const { return static_cast<int>(bumps.size()); }
  void validate(int dim) const;
  double value(const std::vector<double>& x) const;
  /// Effective limit couplings b_i = height_i^2 (the potential enters the
  /// interaction on both sides of the convolution).
  std::vector<double> couplings() const;
};

/// Two-radius cutoff zeta: identically 1 inside radius tau, identically 0
/// outside 2 tau, smooth in between. In the rescaled frame the radii become
/// tau/eps and 2 tau/eps.
struct CutoffSpec {
  double tau = 1.0;
  double evaluate(double radius) const;
  void validate(const PotentialSpec& potential) const;
};

struct ConcentrationReport {
  double epsilon = 0.0;
  bool solved = false;
  std::string error;  // set when this epsilon failed; other fields best-effort
  std::vector<std::vector<double>> bump_locations;  // physical coordinates
  std::vector<double> distances;                    // dist(x_eps^i, a_i)
  double lambda_eps = 0.0;
  std::vector<double> mass_fractions;               // regional mass detectors
  std::vector<double> profile_errors;               // L2 gap to limit profiles
  double energy = 0.0;
  double ansatz_norm = 0.0;                         // T_eps of the seed
  int iterations = 0;
};

/// Outer-loop controls of the multi-bump flow: the inner pass evolves with
/// per-region mass fixed to a trial split, the outer pass equalizes the
/// regional multipliers through the closed-form split model.
struct SemiclassicalConfig {
  SolverConfig solver;
  int inner_iterations = 80;
  int outer_iterations = 40;
  double lambda_spread_tol = 1e-7;  // relative spread of regional multipliers
  double split_damping = 0.5;
};

/// Samples x -> Q(eps x) on the grid. Throws when a scaled attraction domain
/// ball(a_i/eps, r_i/eps) does not fit inside the box.
ScalarField eval_potential(const PotentialSpec& potential, const GridSpec& grid, double epsilon);

struct AnsatzResult {
  ScalarField field;
  double norm_factor = 0.0;  // T = 1/|sum of cutoff translates|_2
};

/// Sum of cutoff-multiplied profile translates centered at positions[i]/eps,
/// renormalized to unit mass. Positions are physical bump locations; profiles
/// live on their own (smaller) grids and are placed spectrally.
AnsatzResult build_ansatz(const std::vector<ScalarField>& profiles,
                          const std::vector<std::vector<double>>& positions,
                          const CutoffSpec& cutoff, double epsilon, const GridSpec& grid);

/// Constrained ground state of the eps-rescaled problem with spatial weight
/// Q(eps x). Single-bump or constant potentials reduce to the plain weighted
/// solver; k >= 2 subcritical runs the split-stabilized two-level flow.
GroundStateResult solve_semiclassical(double epsilon, const PotentialSpec& potential,
                                      const ChoquardParams& params,
                                      const SemiclassicalConfig& cfg, const ScalarField& seed);

/// Strict local maxima over the 3^dim - 1 neighbor stencil; keeps the largest
/// inside each scaled attraction domain. Returns physical coordinates
/// eps * (grid point). Throws when some domain holds no maximum.
std::vector<std::vector<double>> detect_bumps(const ScalarField& v,
                                              const PotentialSpec& potential, double epsilon);

/// Regional mass detectors: fraction of sum_j int_{Omega_{eps,j}} v^2 carried
/// by domain i.
std::vector<double> mass_fractions(const ScalarField& v, const PotentialSpec& potential,
                                   double epsilon);

struct SweepOptions {
  int points_per_axis = 96;
  double box_scale = 3.0;  // half_width(eps) = box_scale / eps
  // Optional per-eps half-widths (one per eps_list entry). Overrides box_scale:
  // lets the box grow slower than 1/eps, keeping the resolution usable at the
  // small-eps end while the attraction domains still fit.
  std::vector<double> half_widths;
  std::vector<ScalarField> limit_profiles;  // minimizers at (b_i, s_i^0)
  double cutoff_tau = 0.0;                  // 0 -> 0.45 * min domain radius
  double profile_ball_radius = 0.0;         // 0 -> scaled domain radius
};

/// For each eps (strictly decreasing): build or warm-start the seed, solve,
/// detect bumps, record multipliers / detectors / profile gaps. Per-eps
/// failures are recorded in the report and the sweep continues.
std::vector<ConcentrationReport> epsilon_sweep(const PotentialSpec& potential,
                                               const ChoquardParams& params,
                                               const SemiclassicalConfig& cfg,
                                               const std::vector<double>& eps_list,
                                               const SweepOptions& opts);

}  // namespace choq
