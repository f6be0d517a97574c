#include "choq/semiclassical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "choq/fft.hpp"
#include "choq/limit.hpp"

namespace choq {

namespace {

double dist(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) s += (x[d] - y[d]) * (x[d] - y[d]);
  return std::sqrt(s);
}

std::vector<double> scaled_center(const BumpSpec& b, double epsilon) {
  std::vector<double> c(b.center.size());
  for (std::size_t d = 0; d < c.size(); ++d) c[d] = b.center[d] / epsilon;
  return c;
}

// Squared integer wavenumber per flat index; spacing-independent.
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

// Voronoi label of each grid point with respect to the scaled bump centers.
std::vector<int> region_labels(const GridSpec& g, const PotentialSpec& pot, double epsilon) {
  const int k = pot.k();
  std::vector<std::vector<double>> centers(k);
  for (int i = 0; i < k; ++i) centers[i] = scaled_center(pot.bumps[i], epsilon);
  std::vector<int> labels(g.total_points());
  std::vector<int> idx(g.dim);
  std::vector<double> x(g.dim);
  for (std::size_t f = 0; f < labels.size(); ++f) {
    decode_index(g, f, idx.data());
    for (int d = 0; d < g.dim; ++d) x[d] = g.coord(idx[d]);
    int best = 0;
    double best_d = dist(x, centers[0]);
    for (int i = 1; i < k; ++i) {
      const double di = dist(x, centers[i]);
      if (di < best_d) {
        best_d = di;
        best = i;
      }
    }
    labels[f] = best;
  }
  return labels;
}

std::vector<double> regional_masses(const ScalarField& u, const std::vector<int>& labels, int k) {
  std::vector<double> m(k, 0.0);
  for (std::size_t i = 0; i < u.size(); ++i)
    m[labels[i]] += u.values[i] * u.values[i];
  const double hd = u.grid.cell_volume();
  for (double& v : m) v *= hd;
  return m;
}

}  // namespace

void PotentialSpec::validate(int dim) const {
  if (!(background > 0.0))
    throw std::invalid_argument("PotentialSpec: background must be positive");
  for (const BumpSpec& b : bumps) {
    if (b.center.size() != static_cast<std::size_t>(dim))
      throw std::invalid_argument("PotentialSpec: bump center dimension mismatch");
    if (!(b.height > background))
      throw std::invalid_argument("PotentialSpec: bump height must exceed the background");
    if (!(b.width > 0.0) || !(b.domain_radius > 0.0))
      throw std::invalid_argument("PotentialSpec: bump width and domain radius must be positive");
  }
  for (std::size_t i = 0; i < bumps.size(); ++i)
    for (std::size_t j = i + 1; j < bumps.size(); ++j) {
      const double d = dist(bumps[i].center, bumps[j].center);
      if (d < bumps[i].width + bumps[j].width)
        throw std::invalid_argument("PotentialSpec: bump supports must not overlap");
      if (d <= bumps[i].domain_radius + bumps[j].domain_radius)
        throw std::invalid_argument("PotentialSpec: attraction domains must be disjoint");
    }
  // strict peak condition: each height exceeds the potential anywhere on the
  // boundary of its attraction domain (neighbor tails can reach in when the
  // domain is larger than the support)
  for (std::size_t i = 0; i < bumps.size(); ++i) {
    double boundary = background +
                      (bumps[i].height - background) *
                          bump_profile(bumps[i].domain_radius / bumps[i].width);
    for (std::size_t j = 0; j < bumps.size(); ++j) {
      if (j == i) continue;
      const double d = dist(bumps[i].center, bumps[j].center) - bumps[i].domain_radius;
      boundary += (bumps[j].height - background) * bump_profile(d / bumps[j].width);
    }
    if (!(boundary < bumps[i].height))
      throw std::invalid_argument(
          "PotentialSpec: height must exceed the potential on the domain boundary");
  }
}

double PotentialSpec::value(const std::vector<double>& x) const {
  double q = background;
  for (const BumpSpec& b : bumps)
    q += (b.height - background) * bump_profile(dist(x, b.center) / b.width);
  return q;
}

std::vector<double> PotentialSpec::couplings() const {
  std::vector<double> b(bumps.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = bumps[i].height * bumps[i].height;
  return b;
}

double CutoffSpec::evaluate(double radius) const {
  const double t = radius / tau;
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  // smooth partition of unity on [tau, 2 tau]
  const double a = std::exp(-1.0 / (2.0 - t));
  const double b = std::exp(-1.0 / (t - 1.0));
  return a / (a + b);
}

void CutoffSpec::validate(const PotentialSpec& potential) const {
  if (!(tau > 0.0)) throw std::invalid_argument("CutoffSpec: tau must be positive");
  for (const BumpSpec& b : potential.bumps)
    if (2.0 * tau >= b.domain_radius)
      throw std::invalid_argument(
          "CutoffSpec: 2 tau neighborhood must stay inside every attraction domain");
}

ScalarField eval_potential(const PotentialSpec& potential, const GridSpec& grid, double epsilon) {
  potential.validate(grid.dim);
  if (!(epsilon > 0.0)) throw std::invalid_argument("eval_potential: epsilon must be positive");
  for (const BumpSpec& b : potential.bumps)
    for (double c : b.center)
      if (std::abs(c) / epsilon + b.domain_radius / epsilon >= grid.half_width)
        throw std::invalid_argument(
            "eval_potential: scaled attraction domain exceeds the box at this epsilon");
  ScalarField q(grid);
  std::vector<int> idx(grid.dim);
  std::vector<double> x(grid.dim);
  for (std::size_t i = 0; i < q.size(); ++i) {
    decode_index(grid, i, idx.data());
    for (int d = 0; d < grid.dim; ++d) x[d] = epsilon * grid.coord(idx[d]);
    q.values[i] = potential.value(x);
  }
  return q;
}

AnsatzResult build_ansatz(const std::vector<ScalarField>& profiles,
                          const std::vector<std::vector<double>>& positions,
                          const CutoffSpec& cutoff, double epsilon, const GridSpec& grid) {
  if (profiles.empty() || profiles.size() != positions.size())
    throw std::invalid_argument("build_ansatz: need one profile per position");
  if (!(epsilon > 0.0)) throw std::invalid_argument("build_ansatz: epsilon must be positive");
  if (!(cutoff.tau > 0.0)) throw std::invalid_argument("build_ansatz: cutoff tau must be positive");
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (std::size_t j = i + 1; j < positions.size(); ++j)
      if (dist(positions[i], positions[j]) < 4.0 * cutoff.tau)
        throw std::invalid_argument("build_ansatz: cutoff supports overlap at this epsilon");

  ScalarField sum(grid);
  std::vector<int> idx(grid.dim);
  std::vector<double> x(grid.dim);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    std::vector<double> c(positions[i].size());
    for (std::size_t d = 0; d < c.size(); ++d) c[d] = positions[i][d] / epsilon;
    ScalarField placed = fft::spectral_resample_shifted(profiles[i], grid, c);
    // the cutoff both localizes the translate and kills the periodic images
    // of the spectral placement
    for (std::size_t f = 0; f < placed.size(); ++f) {
      decode_index(grid, f, idx.data());
      for (int d = 0; d < grid.dim; ++d) x[d] = grid.coord(idx[d]) - c[d];
      double r = 0.0;
      for (int d = 0; d < grid.dim; ++d) r += x[d] * x[d];
      const double z = cutoff.evaluate(epsilon * std::sqrt(r));
      sum.values[f] += z * placed.values[f];
    }
  }
  const double m = mass(sum);
  if (!(m > 0.0)) throw std::invalid_argument("build_ansatz: assembled field has zero mass");
  AnsatzResult out;
  out.norm_factor = 1.0 / std::sqrt(m);
  out.field = scaled(sum, out.norm_factor);
  return out;
}

namespace {

// Two-level flow for k >= 2 subcritical bumps: the optimal split is a saddle
// of the aggregate energy (a maximum along mass transfers between bumps), so
// the plain normalized flow drains mass toward the deepest well. The inner
// pass holds the per-region masses at a trial split; the outer pass equalizes
// the regional multipliers via the closed-form model lambda_i = c_i s_i^{A'}.
GroundStateResult solve_multibump_subcritical(double epsilon, const PotentialSpec& potential,
                                              const ChoquardParams& params,
                                              const SemiclassicalConfig& cfg,
                                              const ScalarField& seed) {
  const GridSpec& g = seed.grid;
  const int k = potential.k();
  const ScalarField W = eval_potential(potential, g, epsilon);
  const std::vector<int> labels = region_labels(g, potential, epsilon);
  const auto msq = integer_k2(g);
  const double kfac = (M_PI / g.half_width) * (M_PI / g.half_width);
  const double hd = g.cell_volume();
  const double a_prime = split_exponents(params.dim, params.mu, params.p).a_prime;

  GroundStateResult res;
  res.regime = Regime::subcritical;
  ScalarField u = seed;

  // trial split initialized from the seed's own regional distribution
  std::vector<double> split = regional_masses(u, labels, k);
  {
    double tot = 0.0;
    for (double v : split) tot += v;
    if (!(tot > 0.0)) throw SolverError("solve_semiclassical: seed has zero mass");
    for (double& v : split) v /= tot;
  }

  // Smooth partition of unity subordinate to the regions: rational weights
  // chi_i = prod_{j != i} d_j^8 / sum_l prod_{j != l} d_j^8. Renormalizing
  // through chi keeps the field C^inf across region boundaries; an indicator
  // renormalization would put a kink there whose spectral Laplacian dominates
  // the regional multiplier measurement.
  std::vector<std::vector<double>> chi(k, std::vector<double>(g.total_points()));
  {
    std::vector<std::vector<double>> centers(k);
    for (int i = 0; i < k; ++i) centers[i] = scaled_center(potential.bumps[i], epsilon);
    std::vector<int> idx(g.dim);
    std::vector<double> x(g.dim), w(k);
    for (std::size_t f = 0; f < g.total_points(); ++f) {
      decode_index(g, f, idx.data());
      for (int d = 0; d < g.dim; ++d) x[d] = g.coord(idx[d]);
      double dmin = std::numeric_limits<double>::infinity();
      for (int i = 0; i < k; ++i) {
        w[i] = dist(x, centers[i]);
        dmin = std::min(dmin, w[i]);
      }
      double tot = 0.0;
      for (int i = 0; i < k; ++i) {
        // tiny shift keeps the ratio 1 at the center itself (dmin = d_i = 0)
        const double r = (dmin + 1e-9) / (w[i] + 1e-9);
        w[i] = std::pow(r, 8);
        tot += w[i];
      }
      for (int i = 0; i < k; ++i) chi[i][f] = w[i] / tot;
    }
  }

  // Blended renormalization u <- u * sum_i f_i chi_i with factors fixed-point
  // iterated until the Voronoi masses hit the trial split.
  auto renorm_regions = [&](ScalarField& v) {
    std::vector<double> fac(k, 1.0);
    ScalarField blended(g);
    auto blend = [&] {
      for (std::size_t f = 0; f < v.size(); ++f) {
        double gf = 0.0;
        for (int i = 0; i < k; ++i) gf += fac[i] * chi[i][f];
        blended.values[f] = gf * v.values[f];
      }
    };
    for (int pass = 0; pass < 4; ++pass) {
      blend();
      std::vector<double> m = regional_masses(blended, labels, k);
      for (int i = 0; i < k; ++i) {
        if (!(m[i] > 0.0)) throw SolverError("solve_semiclassical: a bump region lost all mass");
        fac[i] *= std::sqrt(params.a * split[i] / m[i]);
      }
    }
    blend();
    v = blended;
  };

  renorm_regions(u);
  int total_iters = 0;
  double dt = cfg.solver.time_step;
  bool equalized = false;
  std::vector<double> lam(k, 0.0);

  const double qpow = params.p - 1.0;
  const double w_const = std::sqrt(params.b);
  for (int outer = 0; outer < cfg.outer_iterations; ++outer) {
    double energy_prev = std::numeric_limits<double>::infinity();
    ScalarField nonlin(g), lap(g);
    double lambda_glob = 0.0;

    for (int inner = 0; inner < cfg.inner_iterations; ++inner, ++total_iters) {
      auto F_u = fft::forward(u);
      double kin = 0.0;
      for (std::size_t i = 0; i < F_u.size(); ++i) kin += msq[i] * std::norm(F_u[i]);
      kin *= kfac * hd / static_cast<double>(F_u.size());

      Interaction inter = interaction(u, params, &W);
      for (std::size_t i = 0; i < u.size(); ++i)
        nonlin.values[i] = w_const * W.values[i] * inter.convolved.values[i] *
                           signed_power(u.values[i], qpow);

      const double E = 0.5 * kin - inter.d_eff / (2.0 * params.p);
      lambda_glob = (inter.d_eff - kin) / params.a;
      const bool stalled =
          std::abs(E - energy_prev) <= cfg.solver.energy_tol * std::max(1.0, std::abs(E));
      energy_prev = E;
      if (cfg.solver.record_trace)
        res.trace.push_back({total_iters, E, std::numeric_limits<double>::quiet_NaN(), 0.0});

      if (stalled) {
        std::vector<fft::cplx> F(F_u);
        for (std::size_t i = 0; i < F.size(); ++i) F[i] *= kfac * msq[i];
        lap = fft::inverse_real(g, std::move(F));
        break;
      }

      auto F_n = fft::forward(nonlin);
      // multiplier in the implicit operator: at an equalized split the fixed
      // point then solves the Euler-Lagrange equation exactly (no O(dt) bias)
      const double lam_imp = (1.0 + dt * lambda_glob > 0.1) ? lambda_glob : 0.0;
      for (std::size_t i = 0; i < F_n.size(); ++i)
        F_n[i] = (F_u[i] + dt * F_n[i]) / (1.0 + dt * (kfac * msq[i] + lam_imp));
      u = fft::inverse_real(g, std::move(F_n));
      renorm_regions(u);

      if (inner + 1 == cfg.inner_iterations) {
        // inner budget spent: refresh the Laplacian the outer pass needs
        F_u = fft::forward(u);
        std::vector<fft::cplx> F(F_u);
        for (std::size_t i = 0; i < F.size(); ++i) F[i] *= kfac * msq[i];
        lap = fft::inverse_real(g, std::move(F));
      }
    }

    // regional multipliers from pairing the equation with u on each region.
    // The convolution is restricted to the region's own density: the
    // cross-bump interaction decays only like separation^{-mu} and would
    // otherwise contaminate the isolated-bump model lambda_i = c_i s_i^{A'}.
    std::vector<double> num(k, 0.0);
    for (int i = 0; i < k; ++i) {
      ScalarField ui(g);
      for (std::size_t f = 0; f < u.size(); ++f)
        if (labels[f] == i) ui.values[f] = u.values[f];
      Interaction self = interaction(ui, params, &W);
      for (std::size_t f = 0; f < u.size(); ++f)
        if (labels[f] == i)
          num[i] += u.values[f] * (w_const * W.values[f] * self.convolved.values[f] *
                                       signed_power(u.values[f], qpow) -
                                   lap.values[f]);
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, mean = 0.0;
    for (int i = 0; i < k; ++i) {
      lam[i] = num[i] * hd / (params.a * split[i]);
      lo = std::min(lo, lam[i]);
      hi = std::max(hi, lam[i]);
      mean += lam[i] / k;
    }
    if (std::abs(mean) > 0.0 && (hi - lo) / std::abs(mean) <= cfg.lambda_spread_tol) {
      equalized = true;
      break;
    }
    if (lo <= 0.0) continue;  // model needs positive multipliers; keep flowing

    // lambda_i = c_i s_i^{A'}; equalizing gives s_i proportional to c_i^{-1/A'}
    std::vector<double> s_new(k);
    double tot = 0.0;
    for (int i = 0; i < k; ++i) {
      const double c = lam[i] / std::pow(split[i], a_prime);
      s_new[i] = std::pow(c, -1.0 / a_prime);
      tot += s_new[i];
    }
    double tot2 = 0.0;
    for (int i = 0; i < k; ++i) {
      split[i] = (1.0 - cfg.split_damping) * split[i] + cfg.split_damping * s_new[i] / tot;
      tot2 += split[i];
    }
    for (double& v : split) v /= tot2;
    renorm_regions(u);
    (void)lambda_glob;
  }

  res.iterations = total_iters;
  res.field = std::move(u);
  for (double& v : res.field.values) v = std::abs(v);
  {  // global renormalization; at an equalized split it matches the regional one
    const double m = mass(res.field);
    const double c = std::sqrt(params.a / m);
    for (double& v : res.field.values) v *= c;
  }
  res.breakdown = energy(res.field, params, &W);
  res.lambda = lagrange_multiplier(res.field, params, &W);
  res.breakdown.lambda = res.lambda;
  res.boundary_fraction = boundary_shell_mass_fraction(res.field);
  res.converged =
      equalized && el_residual(res.field, res.lambda, params, &W) <= cfg.solver.residual_tol * 10;
  return res;
}

}  // namespace

GroundStateResult solve_semiclassical(double epsilon, const PotentialSpec& potential,
                                      const ChoquardParams& params,
                                      const SemiclassicalConfig& cfg, const ScalarField& seed) {
  validate_params(params);
  potential.validate(params.dim);
  if (regime_of(params) == Regime::supercritical) {
    return solve_supercritical_weighted(seed, params, cfg.solver, [&](const GridSpec& g) {
      return eval_potential(potential, g, epsilon);
    });
  }
  if (potential.k() <= 1) {
    ScalarField W = eval_potential(potential, seed.grid, epsilon);
    return solve_subcritical(seed, params, cfg.solver, &W);
  }
  return solve_multibump_subcritical(epsilon, potential, params, cfg, seed);
}

std::vector<std::vector<double>> detect_bumps(const ScalarField& v,
                                              const PotentialSpec& potential, double epsilon) {
  const GridSpec& g = v.grid;
  potential.validate(g.dim);
  const int n = g.points_per_axis;
  const int k = potential.k();

  // strict local maxima over the full neighbor stencil (interior points only)
  std::vector<std::size_t> maxima;
  std::vector<int> idx(g.dim), nb(g.dim);
  std::vector<std::size_t> stride(g.dim);
  stride[g.dim - 1] = 1;
  for (int d = g.dim - 2; d >= 0; --d) stride[d] = stride[d + 1] * n;
  for (std::size_t f = 0; f < v.size(); ++f) {
    decode_index(g, f, idx.data());
    bool interior = true;
    for (int d = 0; d < g.dim; ++d)
      if (idx[d] == 0 || idx[d] == n - 1) interior = false;
    if (!interior) continue;
    bool is_max = true;
    const int stencil = 1;
    std::vector<int> off(g.dim, -stencil);
    while (is_max) {
      bool all_zero = true;
      for (int d = 0; d < g.dim; ++d) all_zero = all_zero && off[d] == 0;
      if (!all_zero) {
        std::size_t nf = 0;
        for (int d = 0; d < g.dim; ++d) nf += stride[d] * (idx[d] + off[d]);
        if (!(v.values[f] > v.values[nf])) is_max = false;
      }
      int d = g.dim - 1;
      while (d >= 0 && ++off[d] > stencil) off[d--] = -stencil;
      if (d < 0) break;
    }
    if (is_max) maxima.push_back(f);
  }

  std::vector<std::vector<double>> out(k);
  for (int i = 0; i < k; ++i) {
    const std::vector<double> c = scaled_center(potential.bumps[i], epsilon);
    const double r = potential.bumps[i].domain_radius / epsilon;
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> x(g.dim);
    bool found = false;
    for (std::size_t f : maxima) {
      decode_index(g, f, idx.data());
      for (int d = 0; d < g.dim; ++d) x[d] = g.coord(idx[d]);
      if (dist(x, c) > r || !(v.values[f] > best)) continue;
      best = v.values[f];
      out[i] = x;
      found = true;
    }
    if (!found)
      throw SolverError("detect_bumps: no local maximum inside attraction domain " +
                        std::to_string(i));
    for (double& xc : out[i]) xc *= epsilon;
  }
  return out;
}

std::vector<double> mass_fractions(const ScalarField& v, const PotentialSpec& potential,
                                   double epsilon) {
  const GridSpec& g = v.grid;
  const int k = potential.k();
  std::vector<std::vector<double>> centers(k);
  std::vector<double> radii(k);
  for (int i = 0; i < k; ++i) {
    centers[i] = scaled_center(potential.bumps[i], epsilon);
    radii[i] = potential.bumps[i].domain_radius / epsilon;
  }
  std::vector<double> m(k, 0.0);
  std::vector<int> idx(g.dim);
  std::vector<double> x(g.dim);
  for (std::size_t f = 0; f < v.size(); ++f) {
    decode_index(g, f, idx.data());
    for (int d = 0; d < g.dim; ++d) x[d] = g.coord(idx[d]);
    for (int i = 0; i < k; ++i)
      if (dist(x, centers[i]) <= radii[i]) {
        m[i] += v.values[f] * v.values[f];
        break;
      }
  }
  double tot = 0.0;
  for (double vi : m) tot += vi;
  if (!(tot > 0.0)) throw std::invalid_argument("mass_fractions: no mass inside any domain");
  for (double& vi : m) vi /= tot;
  return m;
}

std::vector<ConcentrationReport> epsilon_sweep(const PotentialSpec& potential,
                                               const ChoquardParams& params,
                                               const SemiclassicalConfig& cfg,
                                               const std::vector<double>& eps_list,
                                               const SweepOptions& opts) {
  validate_params(params);
  potential.validate(params.dim);
  const int k = potential.k();
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1]))
      throw std::invalid_argument("epsilon_sweep: eps_list must be strictly decreasing");
  if (!opts.half_widths.empty() && opts.half_widths.size() != eps_list.size())
    throw std::invalid_argument("epsilon_sweep: need one half_width per eps");

  double min_radius = std::numeric_limits<double>::infinity();
  for (const BumpSpec& b : potential.bumps) min_radius = std::min(min_radius, b.domain_radius);
  CutoffSpec cutoff{opts.cutoff_tau > 0.0 ? opts.cutoff_tau : 0.45 * min_radius};
  cutoff.validate(potential);

  std::vector<std::vector<double>> positions(k);
  for (int i = 0; i < k; ++i) positions[i] = potential.bumps[i].center;

  // seed profiles for the first epsilon: supplied limit minimizers, or
  // mass-split Gaussians as a fallback
  std::vector<ScalarField> profiles = opts.limit_profiles;
  if (profiles.empty()) {
    LimitSystemSpec lspec{potential.couplings(), params.p, params.mu, params.dim};
    MassSplit s0 = optimal_split(lspec);
    const GridSpec pg = make_grid(params.dim, 64, 16.0);
    for (int i = 0; i < k; ++i) {
      ScalarField f = gaussian_field(pg, std::vector<double>(params.dim, 0.0), 4.0);
      const double m = mass(f);
      profiles.push_back(scaled(f, std::sqrt(s0.s[i] / m)));
    }
  }
  if (static_cast<int>(profiles.size()) != k)
    throw std::invalid_argument("epsilon_sweep: need one limit profile per bump");

  std::vector<ConcentrationReport> reports;
  bool have_prev = false;
  ScalarField prev_solution;
  double prev_eps = 0.0;

  for (double eps : eps_list) {
    ConcentrationReport rep;
    rep.epsilon = eps;
    try {
      const double hw = opts.half_widths.empty() ? opts.box_scale / eps
                                                 : opts.half_widths[reports.size()];
      const GridSpec grid = make_grid(params.dim, opts.points_per_axis, hw);

      std::vector<ScalarField> seeds = profiles;
      if (have_prev) {
        // warm start: carve each bump out of the previous solution and recenter
        // it, so the ansatz assembly re-places it at the new scaled positions
        seeds.clear();
        for (int i = 0; i < k; ++i) {
          std::vector<double> c = scaled_center(potential.bumps[i], prev_eps);
          for (double& cd : c) cd = -cd;  // pull the bump back to the origin
          ScalarField centered = fft::spectral_shift(prev_solution, c);
          std::vector<int> idx(grid.dim);
          std::vector<double> x(grid.dim);
          const GridSpec& pgr = centered.grid;
          for (std::size_t f = 0; f < centered.size(); ++f) {
            decode_index(pgr, f, idx.data());
            double r = 0.0;
            for (int d = 0; d < pgr.dim; ++d) {
              x[d] = pgr.coord(idx[d]);
              r += x[d] * x[d];
            }
            centered.values[f] *= cutoff.evaluate(prev_eps * std::sqrt(r));
          }
          seeds.push_back(std::move(centered));
        }
      }

      AnsatzResult ansatz = build_ansatz(seeds, positions, cutoff, eps, grid);
      rep.ansatz_norm = ansatz.norm_factor;

      GroundStateResult sol = solve_semiclassical(eps, potential, params, cfg, ansatz.field);
      rep.iterations = sol.iterations;
      rep.energy = sol.breakdown.energy;
      rep.lambda_eps = sol.lambda;

      rep.bump_locations = detect_bumps(sol.field, potential, eps);
      rep.distances.resize(k);
      for (int i = 0; i < k; ++i)
        rep.distances[i] = dist(rep.bump_locations[i], potential.bumps[i].center);
      rep.mass_fractions = mass_fractions(sol.field, potential, eps);

      if (!opts.limit_profiles.empty()) {
        rep.profile_errors.resize(k);
        for (int i = 0; i < k; ++i) {
          std::vector<double> c(grid.dim);
          for (int d = 0; d < grid.dim; ++d) c[d] = rep.bump_locations[i][d] / eps;
          ScalarField placed = fft::spectral_resample_shifted(opts.limit_profiles[i], grid, c);
          const double rho = opts.profile_ball_radius > 0.0
                                 ? opts.profile_ball_radius
                                 : potential.bumps[i].domain_radius / eps;
          double err2 = 0.0;
          std::vector<int> idx(grid.dim);
          std::vector<double> x(grid.dim);
          for (std::size_t f = 0; f < placed.size(); ++f) {
            decode_index(grid, f, idx.data());
            for (int d = 0; d < grid.dim; ++d) x[d] = grid.coord(idx[d]);
            if (dist(x, c) > rho) continue;
            const double dv = sol.field.values[f] - placed.values[f];
            err2 += dv * dv;
          }
          rep.profile_errors[i] = std::sqrt(err2 * grid.cell_volume());
        }
      }

      rep.solved = true;
      prev_solution = std::move(sol.field);
      prev_eps = eps;
      have_prev = true;
    } catch (const std::exception& e) {
      rep.error = e.what();
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

}  // namespace choq
