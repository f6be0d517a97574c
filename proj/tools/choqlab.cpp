// choqlab: batch driver for the nonlocal ground-state laboratory.
// Every subcommand reads a JSON config, writes machine-readable reports into
// --out, and follows the exit-code contract 0/1/2 (success / numeric failure /
// config failure).
#include <CLI11.hpp>

#include "choq/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for normalized states of nonlocal Choquard-type equations"};
  app.require_subcommand(1);

  choq::cmd::CliOptions opts;
  std::uint64_t seed_value = 0;
  double tol_value = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON config file")->required();
    sub->add_option("--out", opts.out_dir, "output directory (default: .)");
    sub->add_flag("--dump-fields", opts.dump_fields, "also write .field dumps");
    sub->add_option("--seed", seed_value, "override the config rng seed")
        ->each([&](const std::string&) { opts.seed = seed_value; });
    sub->add_option("--tolerance", tol_value, "override the config relative tolerance")
        ->each([&](const std::string&) { opts.tolerance = tol_value; });
  };

  int (*run)(const choq::cmd::CliOptions&) = nullptr;
  for (auto [name, desc, fn] : {
           std::tuple{"ground-state", "solve one constrained ground state",
                      &choq::cmd::cmd_ground_state},
           std::tuple{"scaling-verify", "check the mass and coupling energy power laws",
                      &choq::cmd::cmd_scaling_verify},
           std::tuple{"limit-table", "closed-form split table and inequality sampling",
                      &choq::cmd::cmd_limit_table},
           std::tuple{"semiclassical-sweep", "multi-bump concentration sweep over epsilon",
                      &choq::cmd::cmd_semiclassical_sweep},
           std::tuple{"hls-audit", "bilinear Riesz-integral inequality audit",
                      &choq::cmd::cmd_hls_audit},
       }) {
    CLI::App* sub = app.add_subcommand(name, desc);
    add_common(sub);
    sub->callback([&run, fn] { run = fn; });
  }

  CLI11_PARSE(app, argc, argv);
  return run(opts);
}
