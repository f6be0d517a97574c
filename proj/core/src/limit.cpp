#include "choq/limit.hpp"

#include <cmath>
#include <random>

#include "choq/fft.hpp"
#include "choq/solver.hpp"

namespace choq {

void LimitSystemSpec::validate() const {
  if (couplings.empty()) throw std::invalid_argument("LimitSystemSpec: k must be >= 1");
  for (double b : couplings)
    if (!(b > 0.0)) throw std::invalid_argument("LimitSystemSpec: couplings must be positive");
  validate_params(base_params());
}

void MassSplit::validate() const {
  double sum = 0.0;
  for (double v : s) {
    if (!(v > 0.0) || !(v < 1.0))
      throw std::invalid_argument("MassSplit: components must lie in (0, 1)");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("MassSplit: components must sum to 1");
}

SplitExponents split_exponents(int dim, double mu, double p) {
  const double N = dim;
  SplitExponents e;
  e.denom = -N * p + 2.0 * N + 2.0 - mu;
  e.beta_mass = (-N * p + 2.0 * N - mu + 2.0 * p) / e.denom;
  e.beta_coupling = 2.0 / e.denom;
  e.a_prime = (2.0 * p - 2.0) / e.denom;
  e.a_p = (e.denom > 0.0) ? e.a_prime : (-1.0 - e.a_prime);
  e.big_a = 2.0 * (-N * p + 2.0 * N - mu + 2.0 * p) / e.denom;
  return e;
}

MassSplit optimal_split(const LimitSystemSpec& spec) {
  spec.validate();
  const double q = -1.0 / (spec.p - 1.0);
  std::vector<double> w(spec.couplings.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::pow(spec.couplings[i], q);
    sum += w[i];
  }
  MassSplit out;
  out.s.resize(w.size());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    out.s[i] = w[i] / sum;
    acc += out.s[i];
  }
  out.s.back() = 1.0 - acc;  // exact complement
  return out;
}

double sigma_at_optimal(const LimitSystemSpec& spec, double base_energy_E11) {
  spec.validate();
  const auto e = split_exponents(spec.dim, spec.mu, spec.p);
  double sum = 0.0;
  for (double b : spec.couplings) sum += std::pow(b, -1.0 / (spec.p - 1.0));
  return base_energy_E11 * std::pow(sum, (-2.0 * spec.p + 2.0) / e.denom);
}

double sigma_of_split(const LimitSystemSpec& spec, const MassSplit& s, double base_energy_E11) {
  s.validate();
  if (s.s.size() != spec.couplings.size())
    throw std::invalid_argument("sigma_of_split: split size does not match k");
  const auto e = split_exponents(spec.dim, spec.mu, spec.p);
  const MassSplit s0 = optimal_split(spec);
  double sum = 0.0;
  for (std::size_t i = 0; i < s.s.size(); ++i)
    sum += std::pow(s.s[i], 1.0 + e.a_prime) * std::pow(s0.s[i], -e.a_prime);
  return sigma_at_optimal(spec, base_energy_E11) * sum;
}

double lambda_zero(const LimitSystemSpec& spec, double base_energy_E11) {
  const auto e = split_exponents(spec.dim, spec.mu, spec.p);
  return -e.big_a * sigma_at_optimal(spec, base_energy_E11);
}

double factorized_energy(const LimitSystemSpec& spec, double b, double a,
                         double base_energy_E11) {
  const auto e = split_exponents(spec.dim, spec.mu, spec.p);
  return base_energy_E11 * std::pow(a, e.beta_mass) * std::pow(b, e.beta_coupling);
}

namespace {

ScalarField dilate_resample(const ScalarField& v, double gamma, double amplitude,
                            const GridSpec& target) {
  // u(x) = amplitude * v(gamma x): evaluate v's trigonometric interpolant on
  // the gamma-scaled copy of the target lattice, then relabel the grid. The
  // scaled lattice can poke beyond v's box for gamma > 1; v is zero there by
  // decay, so those samples are cut rather than allowed to wrap periodically.
  GridSpec scaled = make_grid(target.dim, target.points_per_axis, gamma * target.half_width);
  ScalarField samples = fft::spectral_resample(v, scaled);
  ScalarField out(target);
  std::vector<int> idx(target.dim);
  const double limit = v.grid.half_width * (1.0 + 1e-12);
  for (std::size_t i = 0; i < out.size(); ++i) {
    decode_index(target, i, idx.data());
    bool inside = true;
    for (int d = 0; d < target.dim; ++d)
      inside = inside && std::abs(gamma * target.coord(idx[d])) <= limit;
    out.values[i] = inside ? amplitude * samples.values[i] : 0.0;
  }
  // threshold sized for converged tails (~1e-5 shell fractions), still
  // catching dilations that genuinely push support through the boundary
  if (boundary_shell_mass_fraction(out) > 1e-4)
    throw std::invalid_argument(
        "rescale map: dilated field does not fit the target box (boundary mass)");
  return out;
}

}  // namespace

ScalarField mass_rescale_map(const ScalarField& v, double s, const ChoquardParams& params) {
  validate_params(params);
  if (!(s > 0.0)) throw std::invalid_argument("mass_rescale_map: s must be positive");
  if (s == 1.0) return v;
  const auto e = split_exponents(params.dim, params.mu, params.p);
  const double N = params.dim;
  const double amp = std::pow(s, (2.0 + N - params.mu) / (2.0 * e.denom));
  const double gamma = std::pow(s, (params.p - 1.0) / e.denom);
  return dilate_resample(v, gamma, amp, v.grid);
}

ScalarField coupling_rescale_map(const ScalarField& v, double s, const ChoquardParams& params) {
  validate_params(params);
  if (!(s > 0.0)) throw std::invalid_argument("coupling_rescale_map: s must be positive");
  if (s == 1.0) return v;
  const auto e = split_exponents(params.dim, params.mu, params.p);
  const double N = params.dim;
  const double amp = std::pow(s, N / (2.0 * e.denom));
  const double gamma = std::pow(s, 1.0 / e.denom);
  return dilate_resample(v, gamma, amp, v.grid);
}

ScalarField ground_state_rescale(const ScalarField& v11, double b, double a,
                                 const ChoquardParams& params, const GridSpec& target) {
  validate_params(params);
  const auto e = split_exponents(params.dim, params.mu, params.p);
  const double N = params.dim;
  const double gamma =
      std::pow(b, 1.0 / e.denom) * std::pow(a, (params.p - 1.0) / e.denom);
  const double amp = std::pow(b, N / (2.0 * e.denom)) *
                     std::pow(a, (2.0 + N - params.mu) / (2.0 * e.denom));
  return dilate_resample(v11, gamma, amp, target);
}

SplitInequalityReport verify_split_inequality(const LimitSystemSpec& spec, int samples,
                                              std::uint64_t seed) {
  spec.validate();
  if (samples < 1) throw std::invalid_argument("verify_split_inequality: samples must be >= 1");
  const bool sub = spec.p < mass_critical_exponent(spec.dim, spec.mu);
  // only the sign of E_1(1) matters here; it is negative iff subcritical
  const double e11 = sub ? -1.0 : 1.0;
  const double sigma0 = sigma_at_optimal(spec, e11);
  const MassSplit s0 = optimal_split(spec);

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expd(1.0);
  SplitInequalityReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (int n = 0; n < samples; ++n) {
    MassSplit s;
    s.s.resize(spec.couplings.size());
    double sum = 0.0;
    for (double& v : s.s) {
      v = expd(rng);
      sum += v;
    }
    for (double& v : s.s) v /= sum;
    double dist = 0.0;
    for (std::size_t i = 0; i < s.s.size(); ++i) dist += std::abs(s.s[i] - s0.s[i]);
    if (dist < 1e-12) continue;  // equality case excluded
    ++rep.samples;
    const double sigma = sigma_of_split(spec, s, e11);
    const double margin = sub ? (sigma0 - sigma) : (sigma - sigma0);
    if (margin <= 0.0) ++rep.violations;
    rep.worst_margin = std::min(rep.worst_margin, std::abs(sigma - sigma0));
  }
  return rep;
}

}  // namespace choq
