#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <json.hpp>

#include "choq/commands.hpp"
#include "choq/io.hpp"

using namespace choq;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("choq_cli_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string write_config(const TempDir& dir, const std::string& name, const json& body) {
  const std::string path = dir.file(name);
  std::ofstream out(path);
  out << body.dump(2);
  return path;
}

json ground_state_config() {
  return json{{"grid", {{"dim", 3}, {"points_per_axis", 32}, {"half_width", 12.0}}},
              {"params", {{"dim", 3}, {"mu", 1.0}, {"p", 2.0}, {"b", 1.0}, {"a", 1.0}}}};
}

json parse_file(const std::string& path) {
  std::ifstream in(path);
  return json::parse(in);
}

}  // namespace

TEST_CASE("config and validation failures exit with code 2") {
  TempDir tmp;
  cmd::CliOptions opts;
  opts.out_dir = tmp.path.string();

  // missing / absent config file
  CHECK(cmd::cmd_ground_state(opts) == 2);
  opts.config_path = tmp.file("absent.json");
  CHECK(cmd::cmd_ground_state(opts) == 2);

  // malformed JSON
  io::write_text(tmp.file("bad.json"), "{not json");
  opts.config_path = tmp.file("bad.json");
  CHECK(cmd::cmd_ground_state(opts) == 2);

  // missing grid block
  json cfg = ground_state_config();
  cfg.erase("grid");
  opts.config_path = write_config(tmp, "nogrid.json", cfg);
  CHECK(cmd::cmd_ground_state(opts) == 2);

  // mass-critical exponent is rejected up front
  cfg = ground_state_config();
  cfg["params"]["p"] = 7.0 / 3.0;
  opts.config_path = write_config(tmp, "critical.json", cfg);
  CHECK(cmd::cmd_ground_state(opts) == 2);
}

TEST_CASE("ground-state run writes reports and honors the lockfile") {
  TempDir tmp;
  cmd::CliOptions opts;
  opts.out_dir = tmp.path.string();
  opts.config_path = write_config(tmp, "run.json", ground_state_config());
  opts.dump_fields = true;

  // a pre-existing lock blocks the run
  io::write_text(tmp.file(".lock"), "");
  CHECK(cmd::cmd_ground_state(opts) == 2);
  fs::remove(tmp.file(".lock"));

  REQUIRE(cmd::cmd_ground_state(opts) == 0);
  CHECK(!fs::exists(tmp.file(".lock")));  // released on success

  json report = parse_file(tmp.file("ground_state.json"));
  CHECK(report.at("report").at("converged") == true);
  CHECK(report.at("report").at("regime") == "subcritical");
  CHECK(report.at("report").at("lambda").get<double>() > 0.0);
  CHECK(report.at("report").at("breakdown").at("energy").get<double>() < 0.0);
  CHECK(fs::exists(tmp.file("trace.csv")));
  ScalarField field = io::read_field(tmp.file("ground_state.field"));
  CHECK(field.grid.points_per_axis == 32);

  // a second run over the same directory succeeds (lock released, files rewritten)
  CHECK(cmd::cmd_ground_state(opts) == 0);
}

TEST_CASE("limit-table run reports closed-form splits without violations") {
  TempDir tmp;
  cmd::CliOptions opts;
  opts.out_dir = tmp.path.string();
  json cfg = {{"p", 2.0},
              {"mu", 1.0},
              {"dim", 3},
              {"samples", 10},
              {"couplings", json::array({json::array({1.0, 4.0}), json::array({1.0, 1.0, 1.0})})}};
  opts.config_path = write_config(tmp, "limit.json", cfg);
  REQUIRE(cmd::cmd_limit_table(opts) == 0);
  json report = parse_file(tmp.file("limit_table.json"));
  CHECK(report.at("report").at("total_violations") == 0);
  std::ifstream csv(tmp.file("limit_table.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header.rfind("k,couplings,", 0) == 0);
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == 2);
}

TEST_CASE("hls-audit run passes its internal checks") {
  TempDir tmp;
  cmd::CliOptions opts;
  opts.out_dir = tmp.path.string();
  json cfg = {{"grid", {{"dim", 3}, {"points_per_axis", 32}, {"half_width", 12.0}}},
              {"mu", 1.0},
              {"separations", json::array({4.0, 6.0, 8.0})}};
  opts.config_path = write_config(tmp, "hls.json", cfg);
  REQUIRE(cmd::cmd_hls_audit(opts) == 0);
  json report = parse_file(tmp.file("hls.json"));
  CHECK(report.at("report").at("all_checks_ok") == true);
  CHECK(fs::exists(tmp.file("hls.csv")));
}

TEST_CASE("scaling-verify run matches the power laws at loose tolerance") {
  TempDir tmp;
  cmd::CliOptions opts;
  opts.out_dir = tmp.path.string();
  json cfg = ground_state_config();
  // the small box perturbs absolute energies; the ratios still identify the
  // exponents within a loose tolerance
  cfg["scales"] = json::array({2.0});
  cfg["tolerance"] = 0.5;
  opts.config_path = write_config(tmp, "scaling.json", cfg);
  REQUIRE(cmd::cmd_scaling_verify(opts) == 0);
  json report = parse_file(tmp.file("scaling.json"));
  CHECK(report.at("report").at("all_within_tolerance") == true);
  CHECK(report.at("report").at("beta_mass").get<double>() == 3.0);
  CHECK(report.at("report").at("beta_coupling").get<double>() == 2.0);
}

TEST_CASE("semiclassical-sweep rejects incomplete configs") {
  TempDir tmp;
  cmd::CliOptions opts;
  opts.out_dir = tmp.path.string();
  json cfg = ground_state_config();  // no potential block, no eps_list
  opts.config_path = write_config(tmp, "sweep.json", cfg);
  CHECK(cmd::cmd_semiclassical_sweep(opts) == 2);
}
