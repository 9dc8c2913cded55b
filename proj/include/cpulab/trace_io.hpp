// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpulab/trace.hpp"

namespace cpulab {

// Text formats. Resource traces:
//
//   #cpulab-resource<TAB>run_id=<id><TAB>device=<label><TAB>nominal_rate_hz=<hz>
//   <t> <cpu_pct> <ram_mb>
//
// Energy traces use "#cpulab-energy" and "<t> <watts>" records. Floats always
// use '.' as the decimal separator regardless of locale.

void write_resource_trace(std::ostream& out, const ResourceTrace& trace);
ResourceTrace read_resource_trace(std::istream& in);
void save_resource_trace(const std::filesystem::path& path, const ResourceTrace& trace);
ResourceTrace load_resource_trace(const std::filesystem::path& path);

void write_energy_trace(std::ostream& out, const EnergyTrace& trace);
/// Also accepts a bare power-meter log (no header line).
EnergyTrace read_energy_trace(std::istream& in);
void save_energy_trace(const std::filesystem::path& path, const EnergyTrace& trace);
EnergyTrace load_energy_trace(const std::filesystem::path& path);

/// One meter log line: "t_seconds watts" (whitespace or comma separated).
/// Blank lines and '#' comments yield nullopt; malformed lines throw.
std::optional<PowerSample> parse_meter_line(std::string_view line);

/// windows.csv: "prompt_id,start_t,end_t" header plus one row per window.
void save_windows_csv(const std::filesystem::path& path, const std::vector<InferenceWindow>& windows);
std::vector<InferenceWindow> load_windows_csv(const std::filesystem::path& path);

std::string format_double(double v, int precision = 6);
double parse_double(std::string_view text);

}  // namespace cpulab
