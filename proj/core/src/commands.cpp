#include "choq/commands.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "choq/hls.hpp"
#include "choq/io.hpp"
#include "choq/limit.hpp"
#include "choq/semiclassical.hpp"
#include "choq/solver.hpp"

namespace choq::cmd {

namespace {

using ordered_json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ordered_json num(double v) { return ordered_json::parse(io::format_double(v)); }

// Exclusive per-run ownership of the output directory.
struct DirLock {
  std::string path;
  int fd = -1;
  explicit DirLock(const std::string& dir) : path(dir + "/.lock") {
    fd = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
      throw ConfigError("output directory is locked by another run (or not writable): " + path);
  }
  ~DirLock() {
    if (fd >= 0) {
      ::close(fd);
      ::unlink(path.c_str());
    }
  }
};

ordered_json load_config(const CliOptions& opts) {
  if (opts.config_path.empty()) throw ConfigError("missing --config path");
  std::ifstream in(opts.config_path);
  if (!in) throw ConfigError("cannot open config file " + opts.config_path);
  ordered_json cfg;
  try {
    cfg = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (opts.seed) cfg["seed"] = *opts.seed;
  if (opts.tolerance) cfg["tolerance"] = *opts.tolerance;
  return cfg;
}

template <typename T>
T require(const ordered_json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("config: missing required key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' has the wrong type");
  }
}

template <typename T>
T get_or(const ordered_json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' has the wrong type");
  }
}

GridSpec parse_grid(const ordered_json& cfg) {
  if (!cfg.contains("grid")) throw ConfigError("config: missing 'grid' block");
  const auto& g = cfg.at("grid");
  try {
    return make_grid(require<int>(g, "dim"), require<int>(g, "points_per_axis"),
                     require<double>(g, "half_width"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ChoquardParams parse_params(const ordered_json& cfg, int dim) {
  if (!cfg.contains("params")) throw ConfigError("config: missing 'params' block");
  const auto& p = cfg.at("params");
  ChoquardParams out;
  out.dim = dim;
  out.mu = require<double>(p, "mu");
  out.p = require<double>(p, "p");
  out.b = get_or<double>(p, "b", 1.0);
  out.a = get_or<double>(p, "a", 1.0);
  try {
    validate_params(out);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return out;
}

SolverConfig parse_solver(const ordered_json& cfg) {
  SolverConfig s;
  if (cfg.contains("solver")) {
    const auto& j = cfg.at("solver");
    s.time_step = get_or<double>(j, "time_step", s.time_step);
    s.max_iterations = get_or<int>(j, "max_iterations", s.max_iterations);
    s.energy_tol = get_or<double>(j, "energy_tol", s.energy_tol);
    s.residual_tol = get_or<double>(j, "residual_tol", s.residual_tol);
    s.fiber_tol = get_or<double>(j, "fiber_tol", s.fiber_tol);
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

GroundStateResult run_solver(const GridSpec& grid, const ChoquardParams& params,
                             const SolverConfig& scfg, double seed_width) {
  ScalarField seed = initial_guess(grid, params, std::vector<double>(grid.dim, 0.0), seed_width);
  return regime_of(params) == Regime::subcritical ? solve_subcritical(seed, params, scfg)
                                                  : solve_supercritical(seed, params, scfg);
}

ordered_json result_json(const GroundStateResult& r) {
  ordered_json j;
  j["converged"] = r.converged;
  j["regime"] = r.regime == Regime::subcritical ? "subcritical" : "supercritical";
  j["iterations"] = r.iterations;
  j["lambda"] = num(r.lambda);
  j["breakdown"] = ordered_json::parse(io::breakdown_json(r.breakdown));
  j["boundary_fraction"] = num(r.boundary_fraction);
  return j;
}

void write_report(const std::string& path, const ordered_json& cfg, std::uint64_t seed,
                  ordered_json body) {
  ordered_json out;
  out["config"] = cfg;
  out["seed"] = seed;
  out["report"] = std::move(body);
  io::write_text(path, out.dump(2) + "\n");
}

// Shared guard: maps exception classes onto the exit-code contract.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int cmd_ground_state(const CliOptions& opts) {
  return guarded([&] {
    ordered_json cfg = load_config(opts);
    const GridSpec grid = parse_grid(cfg);
    const ChoquardParams params = parse_params(cfg, grid.dim);
    const SolverConfig scfg = parse_solver(cfg);
    const double seed_width = get_or<double>(cfg, "seed_width", 2.0);
    const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 0);
    DirLock lock(opts.out_dir);

    GroundStateResult r = run_solver(grid, params, scfg, seed_width);
    write_report(opts.out_dir + "/ground_state.json", cfg, seed, result_json(r));
    io::write_trace_csv(opts.out_dir + "/trace.csv", r.trace);
    if (opts.dump_fields) io::write_field(opts.out_dir + "/ground_state.field", r.field);
    return r.converged ? 0 : 1;
  });
}

int cmd_scaling_verify(const CliOptions& opts) {
  return guarded([&] {
    ordered_json cfg = load_config(opts);
    const GridSpec grid = parse_grid(cfg);
    const ChoquardParams params = parse_params(cfg, grid.dim);
    const SolverConfig scfg = parse_solver(cfg);
    const double seed_width = get_or<double>(cfg, "seed_width", 2.0);
    const double tol = get_or<double>(cfg, "tolerance", 0.01);
    const std::vector<double> scales = get_or<std::vector<double>>(cfg, "scales", {0.5, 2.0});
    const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 0);
    DirLock lock(opts.out_dir);

    const auto exps = split_exponents(params.dim, params.mu, params.p);
    GroundStateResult base = run_solver(grid, params, scfg, seed_width);
    if (!base.converged) throw SolverError("scaling_verify: baseline run did not converge");

    std::vector<std::vector<std::string>> rows;
    bool all_ok = true;
    auto add_row = [&](const std::string& kind, double s, double exponent,
                       ChoquardParams varied) {
      // seed inside the bound-state basin via the closed-form scaling map
      ScalarField vseed = transport_ground_state(base.field, params, varied);
      GroundStateResult r = regime_of(varied) == Regime::subcritical
                                ? solve_subcritical(vseed, varied, scfg)
                                : solve_supercritical(vseed, varied, scfg);
      if (!r.converged) throw SolverError("scaling_verify: " + kind + " variant did not converge");
      const double predicted = std::pow(s, exponent);
      const double measured = r.breakdown.energy / base.breakdown.energy;
      const double rel = std::abs(measured / predicted - 1.0);
      all_ok = all_ok && rel <= tol;
      rows.push_back({kind, io::format_double(s), io::format_double(r.breakdown.energy),
                      io::format_double(predicted), io::format_double(measured),
                      io::format_double(rel)});
    };
    for (double s : scales) {
      ChoquardParams pm = params;
      pm.a *= s;
      add_row("mass", s, exps.beta_mass, pm);
    }
    for (double s : scales) {
      ChoquardParams pc = params;
      pc.b *= s;
      add_row("coupling", s, exps.beta_coupling, pc);
    }
    io::write_csv(opts.out_dir + "/scaling.csv",
                  {"kind", "s", "energy", "predicted_ratio", "measured_ratio", "rel_error"},
                  rows);
    ordered_json body;
    body["baseline_energy"] = num(base.breakdown.energy);
    body["beta_mass"] = num(exps.beta_mass);
    body["beta_coupling"] = num(exps.beta_coupling);
    body["all_within_tolerance"] = all_ok;
    write_report(opts.out_dir + "/scaling.json", cfg, seed, std::move(body));
    return all_ok ? 0 : 1;
  });
}

int cmd_limit_table(const CliOptions& opts) {
  return guarded([&] {
    ordered_json cfg = load_config(opts);
    const double p = require<double>(cfg, "p");
    const double mu = require<double>(cfg, "mu");
    const int dim = get_or<int>(cfg, "dim", 3);
    const int samples = get_or<int>(cfg, "samples", 50);
    const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 0);
    const auto coupling_sets = require<std::vector<std::vector<double>>>(cfg, "couplings");
    DirLock lock(opts.out_dir);

    std::vector<std::vector<std::string>> rows;
    int total_violations = 0;
    for (const auto& b : coupling_sets) {
      LimitSystemSpec spec{b, p, mu, dim};
      spec.validate();
      MassSplit s0 = optimal_split(spec);
      // everything is a ratio to the base-problem energy, so pass 1
      const double sigma_ratio = sigma_at_optimal(spec, 1.0);
      const double lambda_ratio = lambda_zero(spec, 1.0);
      SplitInequalityReport rep = verify_split_inequality(spec, samples, seed);
      total_violations += rep.violations;
      std::string bs, ss;
      for (std::size_t i = 0; i < b.size(); ++i)
        bs += (i ? ";" : "") + io::format_double(b[i]);
      for (std::size_t i = 0; i < s0.s.size(); ++i)
        ss += (i ? ";" : "") + io::format_double(s0.s[i]);
      rows.push_back({std::to_string(spec.k()), bs, io::format_double(p), io::format_double(mu),
                      ss, io::format_double(sigma_ratio), io::format_double(lambda_ratio),
                      std::to_string(rep.violations), io::format_double(rep.worst_margin)});
    }
    io::write_csv(opts.out_dir + "/limit_table.csv",
                  {"k", "couplings", "p", "mu", "optimal_split", "sigma_over_base",
                   "lambda0_over_base", "violations", "worst_margin"},
                  rows);
    ordered_json body;
    body["total_violations"] = total_violations;
    write_report(opts.out_dir + "/limit_table.json", cfg, seed, std::move(body));
    return total_violations == 0 ? 0 : 1;
  });
}

int cmd_semiclassical_sweep(const CliOptions& opts) {
  return guarded([&] {
    ordered_json cfg = load_config(opts);
    const ChoquardParams params = [&] {
      ordered_json shim = cfg;
      if (!shim.contains("params")) throw ConfigError("config: missing 'params' block");
      return parse_params(shim, get_or<int>(cfg.at("params"), "dim", 3));
    }();
    SemiclassicalConfig scfg;
    scfg.solver = parse_solver(cfg);
    scfg.inner_iterations = get_or<int>(cfg, "inner_iterations", scfg.inner_iterations);
    scfg.outer_iterations = get_or<int>(cfg, "outer_iterations", scfg.outer_iterations);
    scfg.lambda_spread_tol = get_or<double>(cfg, "lambda_spread_tol", scfg.lambda_spread_tol);

    if (!cfg.contains("potential")) throw ConfigError("config: missing 'potential' block");
    const auto& pj = cfg.at("potential");
    PotentialSpec pot;
    pot.background = require<double>(pj, "background");
    for (const auto& bj : require<std::vector<ordered_json>>(pj, "bumps")) {
      BumpSpec b;
      b.center = require<std::vector<double>>(bj, "center");
      b.height = require<double>(bj, "height");
      b.width = require<double>(bj, "width");
      b.domain_radius = require<double>(bj, "domain_radius");
      pot.bumps.push_back(std::move(b));
    }
    try {
      pot.validate(params.dim);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }

    const auto eps_list = require<std::vector<double>>(cfg, "eps_list");
    SweepOptions sw;
    sw.points_per_axis = get_or<int>(cfg, "grid_points", sw.points_per_axis);
    sw.box_scale = get_or<double>(cfg, "box_scale", sw.box_scale);
    sw.half_widths = get_or<std::vector<double>>(cfg, "half_widths", {});
    sw.cutoff_tau = get_or<double>(cfg, "cutoff_tau", sw.cutoff_tau);
    const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 0);
    DirLock lock(opts.out_dir);

    // targets of the concentration trends, from the limit-system closed forms
    // relative to a measured base-problem energy
    LimitSystemSpec lspec{pot.couplings(), params.p, params.mu, params.dim};
    double base_energy;
    if (cfg.contains("base_energy")) {
      base_energy = require<double>(cfg, "base_energy");
    } else {
      const GridSpec bg = make_grid(params.dim, get_or<int>(cfg, "base_grid_points", 32),
                                    get_or<double>(cfg, "base_half_width", 8.0));
      ChoquardParams unit = params;
      unit.b = 1.0;
      unit.a = 1.0;
      GroundStateResult r = run_solver(bg, unit, scfg.solver, 1.5);
      if (!r.converged) throw SolverError("semiclassical_sweep: base-energy run did not converge");
      base_energy = r.breakdown.energy;
    }
    const double sigma0 = sigma_at_optimal(lspec, base_energy);
    const double lambda0 = lambda_zero(lspec, base_energy);
    const MassSplit s0 = optimal_split(lspec);

    auto reports = epsilon_sweep(pot, params, scfg, eps_list, sw);

    std::vector<std::vector<std::string>> rows;
    bool all_solved = true;
    bool dist_ok = true, lambda_ok = true, energy_ok = true;
    double prev_dist = std::numeric_limits<double>::infinity();
    double prev_lgap = std::numeric_limits<double>::infinity();
    double prev_egap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const ConcentrationReport& r = reports[i];
      all_solved = all_solved && r.solved;
      double max_dist = 0.0;
      for (double d : r.distances) max_dist = std::max(max_dist, d);
      const double lgap = std::abs(r.lambda_eps - lambda0);
      const double egap = std::abs(r.energy - sigma0);
      if (r.solved) {
        if (max_dist > prev_dist + 1e-12) dist_ok = false;
        if (lgap >= prev_lgap) lambda_ok = false;
        if (egap >= prev_egap) energy_ok = false;
        prev_dist = max_dist;
        prev_lgap = lgap;
        prev_egap = egap;
      }
      std::string fractions;
      for (std::size_t j = 0; j < r.mass_fractions.size(); ++j)
        fractions += (j ? ";" : "") + io::format_double(r.mass_fractions[j]);
      rows.push_back({io::format_double(r.epsilon), r.solved ? "1" : "0",
                      io::format_double(max_dist), io::format_double(r.lambda_eps),
                      io::format_double(lgap), io::format_double(r.energy),
                      io::format_double(egap), fractions});

      ordered_json rj;
      rj["epsilon"] = num(r.epsilon);
      rj["solved"] = r.solved;
      if (!r.error.empty()) rj["error"] = r.error;
      rj["lambda"] = num(r.lambda_eps);
      rj["energy"] = num(r.energy);
      rj["ansatz_norm"] = num(r.ansatz_norm);
      rj["iterations"] = r.iterations;
      ordered_json locs = ordered_json::array();
      for (const auto& x : r.bump_locations) {
        ordered_json pt = ordered_json::array();
        for (double c : x) pt.push_back(num(c));
        locs.push_back(pt);
      }
      rj["bump_locations"] = locs;
      ordered_json mf = ordered_json::array();
      for (double f : r.mass_fractions) mf.push_back(num(f));
      rj["mass_fractions"] = mf;
      ordered_json ds = ordered_json::array();
      for (double d : r.distances) ds.push_back(num(d));
      rj["distances"] = ds;
      write_report(opts.out_dir + "/sweep_" + std::to_string(i) + ".json", cfg, seed,
                   std::move(rj));
    }
    io::write_csv(opts.out_dir + "/sweep.csv",
                  {"epsilon", "solved", "max_bump_distance", "lambda", "lambda_gap", "energy",
                   "energy_gap", "mass_fractions"},
                  rows);

    ordered_json body;
    body["sigma0"] = num(sigma0);
    body["lambda0"] = num(lambda0);
    ordered_json s0j = ordered_json::array();
    for (double s : s0.s) s0j.push_back(num(s));
    body["optimal_split"] = s0j;
    body["all_solved"] = all_solved;
    body["distance_trend_ok"] = dist_ok;
    body["lambda_trend_ok"] = lambda_ok;
    body["energy_trend_ok"] = energy_ok;
    write_report(opts.out_dir + "/sweep_summary.json", cfg, seed, std::move(body));
    return (all_solved && dist_ok && lambda_ok && energy_ok) ? 0 : 1;
  });
}

int cmd_hls_audit(const CliOptions& opts) {
  return guarded([&] {
    ordered_json cfg = load_config(opts);
    const GridSpec grid = parse_grid(cfg);
    const double mu = require<double>(cfg, "mu");
    const double tol = get_or<double>(cfg, "tolerance", 0.01);
    const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", 0);
    DirLock lock(opts.out_dir);

    std::vector<std::vector<std::string>> rows;
    bool ok = true;

    {  // exact-scaling pair: the quotient must not move under dilation
      HlsCase c;
      c.mu = mu;
      c.dim = grid.dim;
      const double qr = 2.0 * grid.dim / (2.0 * grid.dim - mu);
      c.q = c.r = qr;
      c.mode = HlsCase::Mode::exact_scaling;
      const std::vector<double> dilations =
          get_or<std::vector<double>>(cfg, "dilations", {0.5, 1.0, 2.0});
      const double width0 = get_or<double>(cfg, "gaussian_width", 2.0);
      double ref = 0.0;
      for (double lam : dilations) {
        ScalarField f =
            gaussian_field(grid, std::vector<double>(grid.dim, 0.0), width0 / lam);
        const double ratio = hls_ratio(f, f, c);
        if (ref == 0.0) ref = ratio;
        if (std::abs(ratio / ref - 1.0) > tol) ok = false;
        rows.push_back({"exact_scaling", io::format_double(lam), io::format_double(ratio)});
      }
    }

    {  // subcritical pair: separated bumps must decay under the kernel bound
      HlsCase c;
      c.mu = mu;
      c.dim = grid.dim;
      c.q = get_or<double>(cfg, "pair_q", 2.0);
      c.r = get_or<double>(cfg, "pair_r", 2.0);
      c.mode = HlsCase::Mode::subcritical_pair;
      const std::vector<double> seps =
          get_or<std::vector<double>>(cfg, "separations", {4.0, 8.0, 16.0});
      const double width = get_or<double>(cfg, "bump_width", 1.0);
      double prev = std::numeric_limits<double>::infinity();
      for (double R : seps) {
        const double ratio = disjoint_decay(grid, R, width, c);
        const double envelope = disjoint_envelope(grid, R, width, c);
        if (!(ratio < prev) || !(ratio <= envelope)) ok = false;
        prev = ratio;
        rows.push_back({"disjoint", io::format_double(R), io::format_double(ratio)});
      }
    }

    io::write_csv(opts.out_dir + "/hls.csv", {"case", "parameter", "ratio"}, rows);
    ordered_json body;
    body["all_checks_ok"] = ok;
    write_report(opts.out_dir + "/hls.json", cfg, seed, std::move(body));
    return ok ? 0 : 1;
  });
}

}  // namespace choq::cmd
