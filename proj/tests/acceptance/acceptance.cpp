// Acceptance gate: end-to-end checks of the numerical laboratory, one
// pass/fail line per criterion. Exit code 0 iff every criterion passes.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "choq/fft.hpp"
#include "choq/functional.hpp"
#include "choq/hls.hpp"
#include "choq/limit.hpp"
#include "choq/riesz.hpp"
#include "choq/semiclassical.hpp"
#include "choq/solver.hpp"

using namespace choq;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- criterion 1
// Riesz convolution oracle: for f = exp(-|x|^2) in 3-d with kernel |x|^{-1},
// (|x|^{-1} * f)(0) = 4 pi int_0^inf e^{-r^2} r dr = 2 pi exactly.
Outcome riesz_oracle() {
  const double target = 2.0 * M_PI;
  auto value_at_origin = [&](int n) {
    GridSpec g = make_grid(3, n, 16.0);
    ScalarField f = gaussian_field(g, {0.0, 0.0, 0.0}, 1.0);
    ScalarField conv = riesz_convolve(f, 1.0);
    const std::size_t c = n / 2;
    return conv.values[(c * n + c) * n + c];
  };
  const double err64 = std::abs(value_at_origin(64) / target - 1.0);
  const double err96 = std::abs(value_at_origin(96) / target - 1.0);
  Outcome o;
  o.pass = err64 <= 1e-3 && err96 < err64;
  o.detail = "rel err 64^3 = " + fmt(err64) + ", 96^3 = " + fmt(err96) + " (target 2 pi)";
  return o;
}

// ---------------------------------------------------------------- criterion 2
// The analytic L2 gradient matches central finite differences of the energy
// along random directions, for a quadratic (p = 2) and a sublinear (p = 1.8)
// nonlinearity.
Outcome gradient_check() {
  GridSpec g = make_grid(3, 24, 6.0);
  std::mt19937_64 rng(20240817);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ScalarField u = gaussian_field(g, {0.4, -0.2, 0.0}, 1.4);
  // keep u strictly positive: for p < 2 the nonlinearity is only C^1 at
  // zeros of u, which would spoil second-order finite differences
  for (double& v : u.values) v += 0.3 + 0.05 * std::abs(gauss(rng));

  double worst = 0.0;
  for (double p : {2.0, 1.8}) {
    ChoquardParams params{3, 1.0, p, 1.3, 1.0};
    ScalarField grad = energy_gradient(u, params);
    for (int dir = 0; dir < 10; ++dir) {
      ScalarField v(g);
      for (double& x : v.values) x = gauss(rng);
      double pairing = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) pairing += grad.values[i] * v.values[i];
      pairing *= g.cell_volume();

      const double h = 1e-5;
      ScalarField up = u, um = u;
      for (std::size_t i = 0; i < u.size(); ++i) {
        up.values[i] += h * v.values[i];
        um.values[i] -= h * v.values[i];
      }
      const double fd = (energy(up, params).energy - energy(um, params).energy) / (2.0 * h);
      worst = std::max(worst, std::abs(fd / pairing - 1.0));
    }
  }
  Outcome o;
  o.pass = worst <= 1e-6;
  o.detail = "worst relative gradient mismatch " + fmt(worst) + " over 10 directions, p in {2, 1.8}";
  return o;
}

// ---------------------------------------------------------------- criterion 3
// Energy-sign dichotomy: the subcritical flow converges to a negative-energy
// bound state with machine-exact mass; the supercritical saddle has positive
// energy, positive multiplier, and sits on the dilation balance.
Outcome dichotomy() {
  SolverConfig cfg;
  cfg.record_trace = false;

  GridSpec gs = make_grid(3, 64, 16.0);
  ChoquardParams sub{3, 1.0, 2.0, 1.0, 1.0};
  GroundStateResult rs = solve_subcritical(initial_guess(gs, sub, {0, 0, 0}, 2.0), sub, cfg);
  const double res_sub = el_residual(rs.field, rs.lambda, sub);
  const double drift = std::abs(mass(rs.field) / sub.a - 1.0);

  GridSpec gp = make_grid(3, 64, 12.0);
  ChoquardParams sup{3, 1.0, 3.0, 1.0, 1.0};
  GroundStateResult rp = solve_supercritical(initial_guess(gp, sup, {0, 0, 0}, 2.0), sup, cfg);

  Outcome o;
  o.pass = rs.converged && drift <= 1e-10 && res_sub <= 1e-6 &&
           rs.breakdown.energy < 0.0 && rs.lambda > 0.0 && rp.converged &&
           rp.breakdown.energy > 0.0 && rp.lambda > 0.0 &&
           std::abs(rp.breakdown.pohozaev) <= 1e-8 * rp.breakdown.kinetic;
  o.detail = "sub: E = " + fmt(rs.breakdown.energy) + ", drift = " + fmt(drift) +
             ", res = " + fmt(res_sub) + "; super: E = " + fmt(rp.breakdown.energy) +
             ", lambda = " + fmt(rp.lambda) +
             ", |P|/K = " + fmt(std::abs(rp.breakdown.pohozaev) / rp.breakdown.kinetic);
  return o;
}

// shared base solve for criteria 4, 5, 7 (computed once)
struct BaseState {
  ScalarField field;
  double energy = 0.0;
  bool ready = false;
};
BaseState g_base;

const ChoquardParams kBaseParams{3, 1.0, 2.0, 1.0, 1.0};

const BaseState& base_state() {
  if (!g_base.ready) {
    SolverConfig cfg;
    cfg.record_trace = false;
    GridSpec g = make_grid(3, 96, 24.0);
    GroundStateResult r =
        solve_subcritical(initial_guess(g, kBaseParams, {0, 0, 0}, 2.0), kBaseParams, cfg);
    if (!r.converged) throw SolverError("base solve did not converge");
    g_base.field = std::move(r.field);
    g_base.energy = r.breakdown.energy;
    g_base.ready = true;
  }
  return g_base;
}

// ---------------------------------------------------------------- criterion 4
// Mass and coupling power laws E(s a) = s^3 E(a), E(s b) = s^2 E(b) (for
// p = 2, mu = 1, N = 3), measured through five independent solver runs.
Outcome scaling_laws() {
  const BaseState& base = base_state();
  SolverConfig cfg;
  cfg.record_trace = false;
  const auto exps = split_exponents(3, 1.0, 2.0);

  double worst = 0.0;
  std::string parts;
  auto run_variant = [&](const std::string& kind, double s, double exponent) {
    ChoquardParams varied = kBaseParams;
    if (kind == "mass")
      varied.a *= s;
    else
      varied.b *= s;
    ScalarField seed = transport_ground_state(base.field, kBaseParams, varied);
    GroundStateResult r = solve_subcritical(seed, varied, cfg);
    if (!r.converged) throw SolverError("scaling variant did not converge");
    const double measured = r.breakdown.energy / base.energy;
    const double rel = std::abs(measured / std::pow(s, exponent) - 1.0);
    worst = std::max(worst, rel);
    parts += kind + " s=" + fmt(s) + ": " + fmt(rel) + "; ";
  };
  for (double s : {0.5, 2.0}) run_variant("mass", s, exps.beta_mass);
  for (double s : {0.5, 2.0}) run_variant("coupling", s, exps.beta_coupling);

  Outcome o;
  o.pass = worst <= 0.01;
  o.detail = "ratio errors vs s^3 / s^2: " + parts + "worst " + fmt(worst);
  return o;
}

// ---------------------------------------------------------------- criterion 5
// Aggregate limit energy: solver energies at the optimal split reproduce the
// closed form, and the multiplier identity lambda_0 = -A sigma holds to
// floating-point accuracy.
Outcome limit_closed_forms() {
  const BaseState& base = base_state();
  LimitSystemSpec spec{{1.0, 4.0}, 2.0, 1.0, 3};
  MassSplit s0 = optimal_split(spec);

  SolverConfig cfg;
  cfg.record_trace = false;
  double sum = 0.0;
  for (int i = 0; i < spec.k(); ++i) {
    ChoquardParams pi = kBaseParams;
    pi.b = spec.couplings[i];
    pi.a = s0.s[i];
    ScalarField seed = transport_ground_state(base.field, kBaseParams, pi);
    GroundStateResult r = solve_subcritical(seed, pi, cfg);
    if (!r.converged) throw SolverError("split component solve did not converge");
    sum += r.breakdown.energy;
  }
  const double sigma = sigma_at_optimal(spec, base.energy);
  const double rel = std::abs(sum / sigma - 1.0);

  const auto exps = split_exponents(3, 1.0, 2.0);
  const double lam0 = lambda_zero(spec, base.energy);
  const double identity_gap = std::abs(lam0 - (-exps.big_a * sigma)) / std::abs(lam0);

  Outcome o;
  o.pass = rel <= 0.01 && identity_gap <= 1e-14;
  o.detail = "sum E(b_i, s_i) = " + fmt(sum) + " vs sigma = " + fmt(sigma) + " (rel " + fmt(rel) +
             "); |lambda_0 + A sigma| / lambda_0 = " + fmt(identity_gap);
  return o;
}

// ---------------------------------------------------------------- criterion 6
// The optimal split extremizes the aggregate energy over the whole simplex:
// random splits never beat it, in either regime.
Outcome split_inequality() {
  int total_violations = 0;
  int combos = 0;
  for (double p : {2.0, 3.0}) {
    for (const auto& b : std::vector<std::vector<double>>{{1.0, 4.0}, {1.0, 2.0, 5.0}}) {
      LimitSystemSpec spec{b, p, 1.0, 3};
      SplitInequalityReport rep = verify_split_inequality(spec, 50, 7u * ++combos);
      total_violations += rep.violations;
    }
  }
  Outcome o;
  o.pass = total_violations == 0;
  o.detail = fmt(total_violations) + " violations over 4 x 50 simplex samples (k = 2, 3; both regimes)";
  return o;
}

// ---------------------------------------------------------------- criterion 7
// Semiclassical concentration: two wells of heights (1, 2), eps halving from
// 0.5 to 0.125 on 96^3; two bumps always detected, locations tighten,
// multiplier and energy approach the limit values, mass splits 4:1.
Outcome semiclassical_concentration() {
  const BaseState& base = base_state();
  PotentialSpec pot;
  pot.background = 0.2;
  pot.bumps = {{{-10.0, 0.0, 0.0}, 1.0, 10.0, 3.0}, {{10.0, 0.0, 0.0}, 2.0, 10.0, 3.0}};
  LimitSystemSpec spec{pot.couplings(), 2.0, 1.0, 3};
  MassSplit s0 = optimal_split(spec);
  const double lam0 = lambda_zero(spec, base.energy);
  const double sigma0 = sigma_at_optimal(spec, base.energy);

  SemiclassicalConfig cfg;
  cfg.solver.record_trace = false;
  cfg.solver.time_step = 0.5;
  cfg.inner_iterations = 100;
  cfg.outer_iterations = 20;
  cfg.lambda_spread_tol = 1e-4;

  SweepOptions opts;
  opts.points_per_axis = 96;
  opts.half_widths = {48.0, 72.0, 108.0};
  opts.cutoff_tau = 1.4;
  for (int i = 0; i < 2; ++i) {
    ChoquardParams pi = kBaseParams;
    pi.b = spec.couplings[i];
    pi.a = s0.s[i];
    opts.limit_profiles.push_back(transport_ground_state(base.field, kBaseParams, pi));
  }

  auto reports = epsilon_sweep(pot, kBaseParams, cfg, {0.5, 0.25, 0.125}, opts);

  bool all_solved = true, bumps_ok = true, dist_ok = true, lam_ok = true, e_ok = true;
  double prev_dist = std::numeric_limits<double>::infinity();
  double prev_lgap = std::numeric_limits<double>::infinity();
  double prev_egap = std::numeric_limits<double>::infinity();
  std::string parts;
  for (const auto& r : reports) {
    if (!r.solved) {
      all_solved = false;
      parts += "eps " + fmt(r.epsilon) + " failed: " + r.error + "; ";
      continue;
    }
    bumps_ok = bumps_ok && r.bump_locations.size() == 2;
    double dmax = 0.0;
    for (double d : r.distances) dmax = std::max(dmax, d);
    const double lgap = std::abs(r.lambda_eps - lam0);
    const double egap = std::abs(r.energy - sigma0);
    if (dmax > prev_dist + 1e-12) dist_ok = false;
    if (lgap >= prev_lgap) lam_ok = false;
    if (egap >= prev_egap) e_ok = false;
    prev_dist = dmax;
    prev_lgap = lgap;
    prev_egap = egap;
    parts += "eps " + fmt(r.epsilon) + ": dmax " + fmt(dmax) + ", lam " + fmt(r.lambda_eps) +
             ", E " + fmt(r.energy) + ", fr (" + fmt(r.mass_fractions[0]) + ", " +
             fmt(r.mass_fractions[1]) + "); ";
  }
  bool final_ok = false, frac_ok = false;
  if (all_solved && reports.size() == 3 && reports.back().solved) {
    const auto& last = reports.back();
    final_ok = std::abs(last.lambda_eps - lam0) <= 0.1 * std::abs(lam0);
    frac_ok = std::abs(last.mass_fractions[0] - s0.s[0]) <= 0.05 &&
              std::abs(last.mass_fractions[1] - s0.s[1]) <= 0.05;
  }

  Outcome o;
  o.pass = all_solved && bumps_ok && dist_ok && lam_ok && e_ok && final_ok && frac_ok;
  o.detail = parts + "lambda_0 = " + fmt(lam0) + ", sigma_0 = " + fmt(sigma0) +
             (o.pass ? "" : std::string(" [solved=") + (all_solved ? "1" : "0") + " bumps=" +
                                (bumps_ok ? "1" : "0") + " dist=" + (dist_ok ? "1" : "0") +
                                " lam=" + (lam_ok ? "1" : "0") + " E=" + (e_ok ? "1" : "0") +
                                " final=" + (final_ok ? "1" : "0") + " frac=" +
                                (frac_ok ? "1" : "0") + "]");
  return o;
}

// ---------------------------------------------------------------- criterion 8
// Bilinear Riesz-integral audit: the quotient is dilation-invariant at the
// scaling exponents, and disjoint pairs decay strictly, below the kernel
// envelope.
Outcome hls_audit() {
  GridSpec g = make_grid(3, 64, 16.0);

  HlsCase sc;
  sc.q = sc.r = 1.2;
  sc.mu = 1.0;
  sc.dim = 3;
  sc.mode = HlsCase::Mode::exact_scaling;
  ScalarField f = gaussian_field(g, {0.5, 0.0, 0.0}, 2.0);
  ScalarField h = gaussian_field(g, {-0.5, 0.5, 0.0}, 1.5);
  const double ref = hls_ratio(f, h, sc);
  double worst = 0.0;
  for (double t : {0.5, 2.0})
    worst = std::max(worst,
                     std::abs(hls_ratio(dilate_rescale_grid(f, t), dilate_rescale_grid(h, t), sc) /
                                  ref -
                              1.0));

  HlsCase pc = sc;
  pc.q = 2.0;
  pc.mode = HlsCase::Mode::subcritical_pair;
  bool decay_ok = true;
  double prev = std::numeric_limits<double>::infinity();
  for (double sep : {4.0, 6.0, 8.0, 10.0, 12.0}) {
    const double d = disjoint_decay(g, sep, 1.0, pc);
    const double env = disjoint_envelope(g, sep, 1.0, pc);
    decay_ok = decay_ok && d > 0.0 && d < prev && d <= env;
    prev = d;
  }

  Outcome o;
  o.pass = worst <= 0.01 && decay_ok;
  o.detail = "dilation drift " + fmt(worst) + "; disjoint decay strictly decreasing under the envelope: " +
             (decay_ok ? "yes" : "no");
  return o;
}

// ---------------------------------------------------------------- criterion 9
// Bitwise determinism: identical inputs reproduce the solver output exactly.
Outcome determinism() {
  SolverConfig cfg;
  cfg.record_trace = false;
  GridSpec g = make_grid(3, 32, 12.0);
  ChoquardParams params{3, 1.0, 2.0, 1.0, 1.0};
  auto run = [&] {
    return solve_subcritical(initial_guess(g, params, {0, 0, 0}, 2.0), params, cfg);
  };
  GroundStateResult r1 = run();
  GroundStateResult r2 = run();
  const bool fields_equal =
      r1.field.values.size() == r2.field.values.size() &&
      std::memcmp(r1.field.values.data(), r2.field.values.data(),
                  r1.field.values.size() * sizeof(double)) == 0;
  Outcome o;
  o.pass = fields_equal && r1.breakdown.energy == r2.breakdown.energy &&
           r1.lambda == r2.lambda && r1.iterations == r2.iterations;
  o.detail = std::string("repeated run: fields ") + (fields_equal ? "bit-identical" : "DIFFER") +
             ", energy delta " + fmt(r1.breakdown.energy - r2.breakdown.energy);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria = {
      {"riesz-oracle", riesz_oracle},
      {"gradient-check", gradient_check},
      {"energy-dichotomy", dichotomy},
      {"scaling-laws", scaling_laws},
      {"limit-closed-forms", limit_closed_forms},
      {"split-inequality", split_inequality},
      {"semiclassical-concentration", semiclassical_concentration},
      {"hls-audit", hls_audit},
      {"determinism", determinism},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  bool all_pass = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int num = static_cast<int>(i) + 1;
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), num) == selected.end())
      continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d (%s): %s  [%.1f s]\n", o.pass ? "PASS" : "FAIL", num,
                criteria[i].name, o.detail.c_str(), secs);
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  std::printf("%s\n", all_pass ? "ACCEPTANCE: ALL CRITERIA PASS" : "ACCEPTANCE: FAILURES PRESENT");
  return all_pass ? 0 : 1;
}
