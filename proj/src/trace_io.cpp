// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpulab/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cpulab/error.hpp"

namespace cpulab {
namespace {

constexpr std::string_view kResourceTag = "#cpulab-resource";
constexpr std::string_view kEnergyTag = "#cpulab-energy";

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line, std::string_view seps) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const auto start = line.find_first_not_of(seps, pos);
    if (start == std::string_view::npos) break;
    auto end = line.find_first_of(seps, start);
    if (end == std::string_view::npos) end = line.size();
    out.push_back(line.substr(start, end - start));
    pos = end;
  }
  return out;
}

struct Header {
  std::string run_id;
  std::string device;
  double rate = 0.0;
};

Header parse_header(std::string_view line, std::string_view tag) {
  Header h;
  auto fields = split_fields(line.substr(tag.size()), "\t");
  for (auto f : fields) {
    const auto eq = f.find('=');
    if (eq == std::string_view::npos) continue;
    const auto key = f.substr(0, eq);
    const auto value = f.substr(eq + 1);
    if (key == "run_id") h.run_id = std::string(value);
    else if (key == "device") h.device = std::string(value);
    else if (key == "nominal_rate_hz") h.rate = parse_double(value);
  }
  return h;
}

void write_header(std::ostream& out, std::string_view tag, const std::string& run_id,
                  const std::string& device, double rate) {
  out << tag << "\trun_id=" << sanitize(run_id) << "\tdevice=" << sanitize(device)
      << "\tnominal_rate_hz=" << format_double(rate, 3) << '\n';
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  return out;
}

std::string_view trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::string format_double(double v, int precision) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  if (res.ec != std::errc{}) return "nan";
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::input, "not a number: '" + std::string(text) + "'");
  }
  return v;
}

void write_resource_trace(std::ostream& out, const ResourceTrace& trace) {
  write_header(out, kResourceTag, trace.run_id, trace.device, trace.nominal_rate_hz);
  for (const auto& s : trace.samples) {
    out << format_double(s.t) << ' ' << format_double(s.cpu_pct) << ' ' << format_double(s.ram_mb)
        << '\n';
  }
}

ResourceTrace read_resource_trace(std::istream& in) {
  ResourceTrace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = trim(line);
    if (v.empty()) continue;
    if (v.starts_with(kResourceTag)) {
      const Header h = parse_header(v, kResourceTag);
      trace.run_id = h.run_id;
      trace.device = h.device;
      if (h.rate > 0) trace.nominal_rate_hz = h.rate;
      continue;
    }
    if (v.front() == '#') continue;
    const auto fields = split_fields(v, " \t,");
    if (fields.size() != 3) {
      throw Error(ErrorCode::input, "resource trace line " + std::to_string(lineno) +
                                        ": expected 3 fields (t cpu_pct ram_mb)");
    }
    trace.samples.push_back({parse_double(fields[0]), parse_double(fields[1]), parse_double(fields[2])});
  }
  return trace;
}

void save_resource_trace(const std::filesystem::path& path, const ResourceTrace& trace) {
  auto out = open_out(path);
  write_resource_trace(out, trace);
}

ResourceTrace load_resource_trace(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_resource_trace(in);
}

std::optional<PowerSample> parse_meter_line(std::string_view line) {
  line = trim(line);
  if (line.empty() || line.front() == '#') return std::nullopt;
  const auto fields = split_fields(line, " \t,");
  if (fields.size() != 2) throw Error(ErrorCode::input, "meter line needs 't watts': '" + std::string(line) + "'");
  PowerSample s{parse_double(fields[0]), parse_double(fields[1])};
  if (s.watts < 0) throw Error(ErrorCode::input, "negative power in meter line");
  return s;
}

void write_energy_trace(std::ostream& out, const EnergyTrace& trace) {
  write_header(out, kEnergyTag, trace.run_id, trace.device, trace.nominal_rate_hz);
  for (const auto& s : trace.samples) out << format_double(s.t) << ' ' << format_double(s.watts) << '\n';
}

EnergyTrace read_energy_trace(std::istream& in) {
  EnergyTrace trace;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view v = trim(line);
    if (v.starts_with(kEnergyTag)) {
      const Header h = parse_header(v, kEnergyTag);
      trace.run_id = h.run_id;
      trace.device = h.device;
      if (h.rate > 0) trace.nominal_rate_hz = h.rate;
      continue;
    }
    if (auto s = parse_meter_line(v)) trace.samples.push_back(*s);
  }
  return trace;
}

void save_energy_trace(const std::filesystem::path& path, const EnergyTrace& trace) {
  auto out = open_out(path);
  write_energy_trace(out, trace);
}

EnergyTrace load_energy_trace(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_energy_trace(in);
}

void save_windows_csv(const std::filesystem::path& path, const std::vector<InferenceWindow>& windows) {
  auto out = open_out(path);
  out << "prompt_id,start_t,end_t\n";
  for (const auto& w : windows) {
    out << w.prompt_id << ',' << format_double(w.start_t) << ',' << format_double(w.end_t) << '\n';
  }
}

std::vector<InferenceWindow> load_windows_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<InferenceWindow> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      if (line.starts_with("prompt_id")) continue;
    }
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, ",");
    if (fields.size() != 3) throw Error(ErrorCode::input, "windows.csv row needs 3 fields");
    out.push_back({parse_double(fields[1]), parse_double(fields[2]), std::string(fields[0])});
  }
  return out;
}

}  // namespace cpulab
