#include "choq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "choq/fft.hpp"

namespace choq {

namespace {

constexpr double kEnergyIncreaseSlack = 1e-13;

// Anderson mixing over the renormalized semi-implicit map g: extrapolates the
// slow low-mode contraction that makes the plain flow crawl near the minimum.
// Proposals that raise the energy are rejected by the caller, which resets the
// history and falls back to the plain step.
class AndersonMixer {
 public:
  explicit AndersonMixer(int depth) : depth_(depth) {}

  void reset() {
    iterates_.clear();
    residuals_.clear();
  }

  bool active() const { return !iterates_.empty(); }

  // u -> g(u) pair for the current iterate; returns the mixed proposal, or
  // g(u) itself while the history is too short.
  std::vector<double> mix(const std::vector<double>& u, const std::vector<double>& gu) {
    std::vector<double> f(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) f[i] = gu[i] - u[i];
    iterates_.push_back(gu);
    residuals_.push_back(std::move(f));
    if (static_cast<int>(iterates_.size()) > depth_ + 1) {
      iterates_.pop_front();
      residuals_.pop_front();
    }
    const int q = static_cast<int>(iterates_.size());
    if (q < 2) return gu;

    // minimize |f_k + sum_i beta_i (f_i - f_k)| over the history differences
    const auto& fk = residuals_.back();
    const int m = q - 1;
    std::vector<std::vector<double>> M(m, std::vector<double>(m, 0.0));
    std::vector<double> rhs(m, 0.0);
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < fk.size(); ++t)
          s += (residuals_[i][t] - fk[t]) * (residuals_[j][t] - fk[t]);
        M[i][j] = M[j][i] = s;
      }
      double r = 0.0;
      for (std::size_t t = 0; t < fk.size(); ++t) r -= (residuals_[i][t] - fk[t]) * fk[t];
      rhs[i] = r;
    }
    double ridge = 0.0;
    for (int i = 0; i < m; ++i) ridge = std::max(ridge, M[i][i]);
    ridge = ridge * 1e-12 + 1e-300;
    for (int i = 0; i < m; ++i) M[i][i] += ridge;
    // Gaussian elimination with partial pivoting on the m x m system
    std::vector<double> beta(m, 0.0);
    {
      for (int c = 0; c < m; ++c) {
        int piv = c;
        for (int r = c + 1; r < m; ++r)
          if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
        std::swap(M[c], M[piv]);
        std::swap(rhs[c], rhs[piv]);
        if (M[c][c] == 0.0) return gu;
        for (int r = c + 1; r < m; ++r) {
          const double fac = M[r][c] / M[c][c];
          for (int cc = c; cc < m; ++cc) M[r][cc] -= fac * M[c][cc];
          rhs[r] -= fac * rhs[c];
        }
      }
      for (int c = m - 1; c >= 0; --c) {
        double s = rhs[c];
        for (int cc = c + 1; cc < m; ++cc) s -= M[c][cc] * beta[cc];
        beta[c] = s / M[c][c];
      }
    }
    std::vector<double> out = iterates_.back();
    for (int i = 0; i < m; ++i) {
      if (beta[i] == 0.0) continue;
      for (std::size_t t = 0; t < out.size(); ++t)
        out[t] += beta[i] * (iterates_[i][t] - iterates_.back()[t]);
    }
    return out;
  }

 private:
  int depth_;
  std::deque<std::vector<double>> iterates_;
  std::deque<std::vector<double>> residuals_;
};

// Squared integer wavenumber sum_m m~^2 per flat index; spacing-independent.
std::vector<double> integer_k2(const GridSpec& g) {
  const int n = g.points_per_axis;
  std::vector<double> msq_axis(n);
  for (int i = 0; i < n; ++i) {
    const int m = (i <= n / 2) ? i : i - n;
    msq_axis[i] = static_cast<double>(m) * m;
  }
  std::vector<double> out(g.total_points());
  std::vector<int> idx(g.dim);
  for (std::size_t i = 0; i < out.size(); ++i) {
    decode_index(g, i, idx.data());
    double s = 0.0;
    for (int d = 0; d < g.dim; ++d) s += msq_axis[idx[d]];
    out[i] = s;
  }
  return out;
}

double renormalize_mass(ScalarField& u, double a) {
  const double m = mass(u);
  if (!(m > 0.0)) throw SolverError("solver: field mass vanished during the flow");
  const double c = std::sqrt(a / m);
  for (double& v : u.values) v *= c;
  return std::abs(mass(u) / a - 1.0);
}

struct StepQuantities {
  std::vector<fft::cplx> F_u;
  double kinetic = 0.0;
  ScalarField conv;      // |x|^{-mu} * (W |u|^p)
  ScalarField nonlin;    // W conv |u|^{p-2} u
  double d_eff = 0.0;
  bool boundary_flagged = false;
};

// One full spectral evaluation of the current iterate.
StepQuantities evaluate(const ScalarField& u, const ChoquardParams& params,
                        const ScalarField* weight, const std::vector<double>& msq) {
  StepQuantities q;
  const GridSpec& g = u.grid;
  const double kfac = (M_PI / g.half_width) * (M_PI / g.half_width);

  q.F_u = fft::forward(u);
  double acc = 0.0;
  for (std::size_t i = 0; i < q.F_u.size(); ++i) acc += msq[i] * std::norm(q.F_u[i]);
  q.kinetic = acc * kfac * g.cell_volume() / static_cast<double>(q.F_u.size());

  const double w_const = std::sqrt(params.b);
  ScalarField dens(g);
  if (params.p == 2.0) {
    for (std::size_t i = 0; i < u.size(); ++i) dens.values[i] = u.values[i] * u.values[i];
  } else {
    for (std::size_t i = 0; i < u.size(); ++i)
      dens.values[i] = std::pow(std::abs(u.values[i]), params.p);
  }
  for (std::size_t i = 0; i < dens.size(); ++i)
    dens.values[i] *= w_const * (weight ? weight->values[i] : 1.0);

  ConvolveOptions opts;
  opts.warn_on_boundary = false;
  opts.flagged = &q.boundary_flagged;
  q.conv = riesz_convolve(dens, params.mu, opts);

  double d = 0.0;
  for (std::size_t i = 0; i < dens.size(); ++i) d += dens.values[i] * q.conv.values[i];
  q.d_eff = d * g.cell_volume();

  const double qpow = params.p - 1.0;
  q.nonlin = ScalarField(g);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = w_const * (weight ? weight->values[i] : 1.0);
    q.nonlin.values[i] = w * q.conv.values[i] * signed_power(u.values[i], qpow);
  }
  return q;
}

// Relative EL residual assembled from already-computed pieces.
// lap_u = -Delta u must be supplied.
double residual_from(const ScalarField& u, const ScalarField& lap_u, const ScalarField& nonlin,
                     double lambda) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double lin = lap_u.values[i] + lambda * u.values[i];
    const double r = lin - nonlin.values[i];
    num += r * r;
    den += lin * lin;
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

ScalarField neg_laplacian_from(const GridSpec& g, const std::vector<fft::cplx>& F_u,
                               const std::vector<double>& msq) {
  const double kfac = (M_PI / g.half_width) * (M_PI / g.half_width);
  std::vector<fft::cplx> F(F_u.size());
  for (std::size_t i = 0; i < F.size(); ++i) F[i] = F_u[i] * (kfac * msq[i]);
  return fft::inverse_real(g, std::move(F));
}

void finalize(GroundStateResult& res, const ChoquardParams& params, const ScalarField* weight) {
  // minimizers can be taken nonnegative; strip roundoff-level sign flips
  for (double& v : res.field.values) v = std::abs(v);
  renormalize_mass(res.field, params.a);
  res.breakdown = energy(res.field, params, weight);
  res.lambda = lagrange_multiplier(res.field, params, weight);
  res.breakdown.lambda = res.lambda;
  res.boundary_fraction = boundary_shell_mass_fraction(res.field);
}

}  // namespace

void SolverConfig::validate() const {
  if (!(time_step > 0.0) || !(time_step <= 100.0))
    throw std::invalid_argument("SolverConfig: time_step must lie in (0, 100]");
  if (!(energy_tol > 0.0) || !(residual_tol > 0.0) || !(fiber_tol > 0.0))
    throw std::invalid_argument("SolverConfig: tolerances must be positive");
  if (max_iterations < 1) throw std::invalid_argument("SolverConfig: max_iterations < 1");
}

ScalarField initial_guess(const GridSpec& grid, const ChoquardParams& params,
                          const std::vector<double>& center, double width) {
  validate_params(params);
  if (center.size() != static_cast<std::size_t>(grid.dim))
    throw std::invalid_argument("initial_guess: center dimension mismatch");
  for (double c : center)
    if (std::abs(c) >= grid.half_width)
      throw std::invalid_argument("initial_guess: center outside the box");
  if (width <= 2.0 * grid.spacing)
    throw std::invalid_argument("initial_guess: width <= 2*spacing, under-resolved seed");
  ScalarField f = gaussian_field(grid, center, width);
  renormalize_mass(f, params.a);
  return f;
}

ScalarField dilate_rescale_grid(const ScalarField& u, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("dilate_rescale_grid: t must be positive");
  ScalarField out = u;
  out.grid.half_width = u.grid.half_width / t;
  out.grid.spacing = 2.0 * out.grid.half_width / out.grid.points_per_axis;
  const double amp = std::pow(t, 0.5 * u.grid.dim);
  for (double& v : out.values) v *= amp;
  return out;
}

ScalarField transport_ground_state(const ScalarField& u, const ChoquardParams& from,
                                   const ChoquardParams& to) {
  validate_params(from);
  validate_params(to);
  if (from.dim != to.dim || from.p != to.p || from.mu != to.mu)
    throw std::invalid_argument("transport_ground_state: exponents must match");
  // v(x) = alpha u(beta x) solves the `to` problem when
  //   (2p-2) log alpha - (N+2-mu) log beta = -log(b1/b0)
  //   2 log alpha - N log beta = log(a1/a0);
  // eliminating alpha gives beta below, and the amplitude is fixed by the mass
  const double theta = dilation_exponent(from);
  const double beta =
      std::exp((std::log(to.b / from.b) + (from.p - 1.0) * std::log(to.a / from.a)) /
               (2.0 - theta));
  ScalarField v = dilate_rescale_grid(u, beta);
  renormalize_mass(v, to.a);
  return v;
}

std::pair<ScalarField, double> pohozaev_dilate(const ScalarField& u,
                                               const ChoquardParams& params) {
  validate_params(params);
  const double theta = dilation_exponent(params);
  if (!(theta > 2.0))
    throw std::invalid_argument("pohozaev_dilate: requires the supercritical regime (theta > 2)");
  const double K = fft::grad_norm_sq(u);
  Interaction inter = interaction(u, params, nullptr);
  if (!(inter.d_eff > 0.0)) throw SolverError("pohozaev_dilate: degenerate fiber, D(u) = 0");
  const double t = std::pow(2.0 * params.p * K / (theta * inter.d_eff), 1.0 / (theta - 2.0));
  return {dilate_rescale_grid(u, t), t};
}

GroundStateResult solve_subcritical(const ScalarField& seed, const ChoquardParams& params,
                                    const SolverConfig& cfg, const ScalarField* weight) {
  validate_params(params);
  cfg.validate();
  if (regime_of(params) != Regime::subcritical)
    throw std::invalid_argument("solve_subcritical: p is not mass-subcritical");
  if (!(mass(seed) > 0.0)) throw std::invalid_argument("solve_subcritical: seed has zero mass");

  GroundStateResult res;
  res.regime = Regime::subcritical;
  ScalarField u = seed;
  double drift = renormalize_mass(u, params.a);

  const GridSpec& g = u.grid;
  const auto msq = integer_k2(g);
  const double kfac = (M_PI / g.half_width) * (M_PI / g.half_width);

  double dt = cfg.time_step;
  double energy_prev = std::numeric_limits<double>::infinity();
  double residual = std::numeric_limits<double>::quiet_NaN();
  ScalarField u_prev = u;
  AndersonMixer mixer(cfg.anderson_depth);
  bool mixed_last = false;
  bool energy_stalled = false;
  int iter = 0;

  for (; iter < cfg.max_iterations; ++iter) {
    StepQuantities q = evaluate(u, params, weight, msq);
    const double E = 0.5 * q.kinetic - q.d_eff / (2.0 * params.p);
    const double lambda = (q.d_eff - q.kinetic) / params.a;

    if (E > energy_prev + kEnergyIncreaseSlack * std::max(1.0, std::abs(energy_prev))) {
      // restore and retry; a rejected extrapolation clears the history first,
      // only a rejected plain step shrinks dt
      u = u_prev;
      if (mixed_last) {
        mixer.reset();
        mixed_last = false;
        continue;
      }
      dt *= 0.5;
      if (dt < cfg.time_step * 1e-4)
        throw SolverError("solve_subcritical: step size too large, energy keeps increasing");
      continue;
    }
    energy_stalled =
        std::abs(E - energy_prev) <= cfg.energy_tol * std::max(1.0, std::abs(E));
    energy_prev = E;
    u_prev = u;

    const bool check = energy_stalled || (iter % std::max(1, cfg.check_every) == 0);
    if (check) {
      ScalarField lap = neg_laplacian_from(g, q.F_u, msq);
      residual = residual_from(u, lap, q.nonlin, lambda);
    }
    if (cfg.record_trace) res.trace.push_back({iter, E, residual, drift});
    if (energy_stalled && residual <= cfg.residual_tol) {
      res.converged = true;
      break;
    }

    // semi-implicit step: backward on -Delta + lambda, forward on the nonlocal
    // term. Carrying lambda in the implicit operator makes the renormalized
    // map's fixed point the exact Euler-Lagrange solution; without it the
    // fixed point is biased by O(dt) and the residual floors at ~dt*lambda.
    const double lam_imp = (1.0 + dt * lambda > 0.1) ? lambda : 0.0;
    auto F_n = fft::forward(q.nonlin);
    for (std::size_t i = 0; i < F_n.size(); ++i)
      F_n[i] = (q.F_u[i] + dt * F_n[i]) / (1.0 + dt * (kfac * msq[i] + lam_imp));
    ScalarField step = fft::inverse_real(g, std::move(F_n));
    renormalize_mass(step, params.a);
    if (cfg.anderson_depth > 0) {
      std::vector<double> proposal = mixer.mix(u.values, step.values);
      mixed_last = proposal != step.values;
      u.values = std::move(proposal);
    } else {
      u = std::move(step);
    }
    drift = renormalize_mass(u, params.a);
  }

  res.iterations = iter;
  res.field = std::move(u);
  finalize(res, params, weight);
  if (res.converged && el_residual(res.field, res.lambda, params, weight) > cfg.residual_tol * 10)
    res.converged = false;  // sign fix must not break the residual
  return res;
}

namespace {

GroundStateResult supercritical_engine(const ScalarField& seed, const ChoquardParams& params,
                                       const SolverConfig& cfg, const WeightEval& weight_eval) {
  validate_params(params);
  cfg.validate();
  if (regime_of(params) != Regime::supercritical)
    throw std::invalid_argument("solve_supercritical: p is not mass-supercritical");

  const double theta = dilation_exponent(params);
  const bool exact_rescale = !weight_eval;  // constant weight scales in closed form

  GroundStateResult res;
  res.regime = Regime::supercritical;
  ScalarField u = seed;
  double drift = renormalize_mass(u, params.a);

  const auto msq = integer_k2(u.grid);
  double dt = cfg.time_step;
  double energy_prev = std::numeric_limits<double>::infinity();
  double residual = std::numeric_limits<double>::quiet_NaN();
  ScalarField u_prev = u;
  double cumulative_t = 1.0;
  AndersonMixer mixer(cfg.anderson_depth);
  bool mixed_last = false;
  bool energy_stalled = false;
  int iter = 0;

  ScalarField weight_field;
  GridSpec weight_grid;

  auto current_weight = [&](const GridSpec& g) -> const ScalarField* {
    if (!weight_eval) return nullptr;
    if (!(weight_grid == g)) {
      weight_field = weight_eval(g);
      weight_grid = g;
    }
    return &weight_field;
  };

  for (; iter < cfg.max_iterations; ++iter) {
    const ScalarField* w = current_weight(u.grid);
    StepQuantities q = evaluate(u, params, w, msq);
    if (!(q.d_eff > 0.0)) throw SolverError("solve_supercritical: degenerate fiber, D = 0");

    // closed-form projection onto the Pohozaev manifold
    double tstar = std::pow(2.0 * params.p * q.kinetic / (theta * q.d_eff), 1.0 / (theta - 2.0));
    if (std::abs(tstar - 1.0) > cfg.fiber_tol) {
      mixer.reset();  // dilation rescales the lattice; the history goes stale
      cumulative_t *= tstar;
      if (cumulative_t < 1e-3 || cumulative_t > 1e3)
        throw SolverError("solve_supercritical: fiber collapse, cumulative dilation " +
                          std::to_string(cumulative_t));
      if (exact_rescale) {
        // all cached quantities transform by exact powers of tstar
        const int N = u.grid.dim;
        u = dilate_rescale_grid(u, tstar);
        const double conv_fac = std::pow(tstar, 0.5 * N * params.p - N + params.mu);
        const double amp = std::pow(tstar, 0.5 * N);
        for (double& v : q.conv.values) v *= conv_fac;
        q.kinetic *= tstar * tstar;
        q.d_eff *= std::pow(tstar, theta);
        const double w_const = std::sqrt(params.b);
        const double qpow = params.p - 1.0;
        for (std::size_t i = 0; i < u.size(); ++i)
          q.nonlin.values[i] = w_const * q.conv.values[i] * signed_power(u.values[i], qpow);
        for (auto& c : q.F_u) c *= amp;  // k-grid rescaling is absorbed below via half_width
      } else {
        // weight does not rescale in closed form; re-evaluate on the new grid
        u = dilate_rescale_grid(u, tstar);
        if (cfg.record_trace) res.trace.push_back({iter, energy_prev, residual, drift});
        continue;
      }
    }

    const GridSpec& g = u.grid;
    const double kfac = (M_PI / g.half_width) * (M_PI / g.half_width);
    const double E = 0.5 * q.kinetic - q.d_eff / (2.0 * params.p);
    const double lambda = (q.d_eff - q.kinetic) / params.a;

    if (E > energy_prev + kEnergyIncreaseSlack * std::max(1.0, std::abs(energy_prev))) {
      u = u_prev;
      if (mixed_last) {
        mixer.reset();
        mixed_last = false;
        continue;
      }
      dt *= 0.5;
      if (dt < cfg.time_step * 1e-4)
        throw SolverError("solve_supercritical: step size too large, energy keeps increasing");
      continue;
    }
    energy_stalled =
        std::abs(E - energy_prev) <= cfg.energy_tol * std::max(1.0, std::abs(E));
    energy_prev = E;
    u_prev = u;

    ScalarField lap = neg_laplacian_from(g, q.F_u, msq);
    residual = residual_from(u, lap, q.nonlin, lambda);
    if (cfg.record_trace) res.trace.push_back({iter, E, residual, drift});
    if (energy_stalled && residual <= cfg.residual_tol) {
      res.converged = true;
      break;
    }

    // semi-implicit step on the profile; the projection above keeps the
    // fiber direction from collapsing. lambda rides in the implicit operator
    // so the fixed point is the unbiased Euler-Lagrange solution.
    const double lam_imp = (1.0 + dt * lambda > 0.1) ? lambda : 0.0;
    auto F_n = fft::forward(q.nonlin);
    for (std::size_t i = 0; i < F_n.size(); ++i)
      F_n[i] = (q.F_u[i] + dt * F_n[i]) / (1.0 + dt * (kfac * msq[i] + lam_imp));
    ScalarField step = fft::inverse_real(g, std::move(F_n));
    renormalize_mass(step, params.a);
    if (cfg.anderson_depth > 0) {
      std::vector<double> proposal = mixer.mix(u.values, step.values);
      mixed_last = proposal != step.values;
      u.values = std::move(proposal);
    } else {
      u = std::move(step);
    }
    drift = renormalize_mass(u, params.a);
  }

  res.iterations = iter;
  res.field = std::move(u);
  {
    const ScalarField* w = current_weight(res.field.grid);
    for (double& v : res.field.values) v = std::abs(v);
    renormalize_mass(res.field, params.a);
    if (!weight_eval) {
      auto [proj, t] = pohozaev_dilate(res.field, params);
      res.field = std::move(proj);
      (void)t;
      w = current_weight(res.field.grid);
    }
    res.breakdown = energy(res.field, params, w);
    res.lambda = lagrange_multiplier(res.field, params, w);
    res.breakdown.lambda = res.lambda;
    res.boundary_fraction = boundary_shell_mass_fraction(res.field);
    if (res.converged &&
        el_residual(res.field, res.lambda, params, w) > cfg.residual_tol * 10)
      res.converged = false;
  }
  return res;
}

}  // namespace

GroundStateResult solve_supercritical(const ScalarField& seed, const ChoquardParams& params,
                                      const SolverConfig& cfg) {
  return supercritical_engine(seed, params, cfg, nullptr);
}

GroundStateResult solve_supercritical_weighted(const ScalarField& seed,
                                               const ChoquardParams& params,
                                               const SolverConfig& cfg,
                                               const WeightEval& weight_eval) {
  return supercritical_engine(seed, params, cfg, weight_eval);
}

}  // namespace choq
