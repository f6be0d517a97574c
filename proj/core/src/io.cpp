#include "choq/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace choq::io {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

// number fields are emitted through format_double so JSON output is
// byte-stable and round-trips exactly
ordered_json num(double v) { return ordered_json::parse(format_double(v)); }

static_assert(std::endian::native == std::endian::little,
              "field dumps assume a little-endian host");

}  // namespace

void write_field(const std::string& path, const ScalarField& f) {
  ordered_json header;
  header["dim"] = f.grid.dim;
  header["points_per_axis"] = f.grid.points_per_axis;
  header["half_width"] = num(f.grid.half_width);
  header["ordering"] = "row-major, axis 0 slowest";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_field: cannot open " + path);
  out << header.dump() << "\n";
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write_field: write failed for " + path);
}

ScalarField read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_field: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_field: missing header in " + path);
  ordered_json header = ordered_json::parse(line);
  GridSpec g = make_grid(header.at("dim").get<int>(), header.at("points_per_axis").get<int>(),
                         header.at("half_width").get<double>());
  ScalarField f(g);
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != f.values.size() * sizeof(double))
    throw std::runtime_error("read_field: truncated data in " + path);
  return f;
}

std::string breakdown_json(const EnergyBreakdown& b) {
  ordered_json j;
  j["kinetic"] = num(b.kinetic);
  j["nonlocal"] = num(b.nonlocal);
  j["energy"] = num(b.energy);
  j["pohozaev"] = num(b.pohozaev);
  if (b.lambda) j["lambda"] = num(*b.lambda);
  return j.dump();
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("write_csv: row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? "," : "\n");
  }
  if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(trace.size());
  for (const TraceRow& t : trace)
    rows.push_back({std::to_string(t.iteration), format_double(t.energy),
                    format_double(t.residual), format_double(t.mass_drift)});
  write_csv(path, {"iteration", "energy", "residual", "mass_drift"}, rows);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_text: cannot open " + path);
  out << content;
  if (!out) throw std::runtime_error("write_text: write failed for " + path);
}

}  // namespace choq::io
