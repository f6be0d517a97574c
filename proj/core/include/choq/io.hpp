#pragma once

#include <string>
#include <vector>

#include "choq/functional.hpp"
#include "choq/solver.hpp"

namespace choq::io {

/// Shortest round-trip decimal representation (printf %.17g, C locale).
std::string format_double(double v);

/// Dump format: one text line holding a JSON header
/// {"dim":..,"points_per_axis":..,"half_width":..,"ordering":"row-major, axis 0 slowest"}
/// followed by raw little-endian IEEE-754 doubles.
void write_field(const std::string& path, const ScalarField& f);
ScalarField read_field(const std::string& path);

/// Flat JSON object with keys kinetic, nonlocal, energy, pohozaev and, when
/// present, lambda.
std::string breakdown_json(const EnergyBreakdown& b);

/// Comma-separated, header row, '.' decimal point, no locale.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace);

void write_text(const std::string& path, const std::string& content);

}  // namespace choq::io
