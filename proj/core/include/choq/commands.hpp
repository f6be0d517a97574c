#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace choq::cmd {

/// Flags shared by every subcommand. Values here override the corresponding
/// config entries; the resolved values are embedded in every output file.
struct CliOptions {
  std::string config_path;
  std::string out_dir = ".";
  bool dump_fields = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
};

// Exit codes (stable contract): 0 success, 1 numeric failure, 2 config or
// validation failure.
int cmd_ground_state(const CliOptions& opts);
int cmd_scaling_verify(const CliOptions& opts);
int cmd_limit_table(const CliOptions& opts);
int cmd_semiclassical_sweep(const CliOptions& opts);
int cmd_hls_audit(const CliOptions& opts);

}  // namespace choq::cmd
