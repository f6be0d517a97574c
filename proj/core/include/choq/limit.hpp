#pragma once

#include <cstdint>
#include <vector>

#include "choq/functional.hpp"

namespace choq {

/// Closed-form machinery of the k-component limit system: couplings b_i,
/// shared exponents, optimal mass splitting and aggregate energies, all
/// expressed relative to the single computed constant E_1(1).
struct LimitSystemSpec {
  std::vector<double> couplings;  // b_i > 0 (b_i = M_i^2 for potentials)
  double p = 2.0;
  double mu = 1.0;
  int dim = 3;

  int k() const { return static_cast<int>(couplings.size()); }
  ChoquardParams base_params() const { return {dim, mu, p, 1.0, 1.0}; }
  void validate() const;
};

struct MassSplit {
  std::vector<double> s;  // positive, sums to 1
  void validate() const;
};

struct SplitExponents {
  double denom;          // D = -Np + 2N + 2 - mu  (= 2 - theta)
  double beta_mass;      // (-Np + 2N - mu + 2p) / D : mass-scaling power of E
  double beta_coupling;  // 2 / D : coupling-scaling power of E (corrected form)
  double a_prime;        // (2p - 2) / D : appears in the split comparison
  double a_p;            // A_p > 0, regime-dependent Hoelder exponent
  double big_a;          // A = 2(-Np + 2N - mu + 2p) / D : multiplier prefactor
};

SplitExponents split_exponents(int dim, double mu, double p);

/// s_i^0 = b_i^{-1/(p-1)} / sum_j b_j^{-1/(p-1)}; the last component is
/// filled by complement so the sum is exactly 1.
MassSplit optimal_split(const LimitSystemSpec& spec);

/// sigma_{s^0} = E_1(1) (sum_i b_i^{-1/(p-1)})^{(-2p+2)/D}.
double sigma_at_optimal(const LimitSystemSpec& spec, double base_energy_E11);

/// sigma_s = sigma_{s^0} sum_i s_i^{1+a'} (s_i^0)^{-a'}.
double sigma_of_split(const LimitSystemSpec& spec, const MassSplit& s, double base_energy_E11);

/// lambda_0 = -A sigma_{s^0}; positive in the subcritical regime.
double lambda_zero(const LimitSystemSpec& spec, double base_energy_E11);

/// E_b(a) = E_1(1) a^{beta_mass} b^{beta_coupling} (factorized energy).
double factorized_energy(const LimitSystemSpec& spec, double b, double a, double base_energy_E11);

/// v in S(b,a) -> u in S(b,sa): u = s^{(2+N-mu)/(2D)} v(s^{(p-1)/D} x),
/// resampled spectrally on v's grid.
ScalarField mass_rescale_map(const ScalarField& v, double s, const ChoquardParams& params);

/// v in S(b,a) -> u in S(sb,a): u = s^{N/(2D)} v(s^{1/D} x); mass preserved.
ScalarField coupling_rescale_map(const ScalarField& v, double s, const ChoquardParams& params);

/// Combined map from the (b=1, a=1) minimizer to (b, a), applied as a single
/// dilation before resampling onto the target grid.
ScalarField ground_state_rescale(const ScalarField& v11, double b, double a,
                                 const ChoquardParams& params, const GridSpec& target);

struct SplitInequalityReport {
  int samples = 0;
  int violations = 0;
  double worst_margin = 0.0;  // smallest |sigma_s - sigma_{s^0}| over valid draws
};

/// Draws Dirichlet(1)-uniform simplex points and counts violations of the
/// strict ordering of sigma_s against sigma_{s^0} (regime-dependent sign).
SplitInequalityReport verify_split_inequality(const LimitSystemSpec& spec, int samples,
                                              std::uint64_t seed);

}  // namespace choq
