// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cpulab/analysis.hpp"
#include "cpulab/orchestrator.hpp"

namespace cpulab {

/// One model×device row of the energy table.
struct EnergyRow {
  std::string model;
  std::string device;
  std::string run_id;
  std::size_t prompts = 0;            // prompts with a measured window
  std::optional<double> max_power_w;
  double mean_duration_s = 0.0;
  double max_duration_s = 0.0;
  /// max power × mean duration (headline).
  std::optional<double> wh_per_prompt;
  /// max power × max duration.
  std::optional<double> wh_per_prompt_max_duration;
  /// Sum of per-prompt max-power bounds.
  std::optional<double> wh_per_run;
  std::optional<double> wh_integrated_mean;
  std::optional<double> wh_integrated_run;
};

/// Aggregates per-prompt energy figures. `durations` has one entry per
/// measured prompt; `energy` may be empty (no meter) or match it 1:1.
EnergyRow make_energy_row(std::string model, std::string device, const std::vector<double>& durations,
                          const std::vector<EnergyMetrics>& energy);

EnergyRow energy_row(const RunArtifacts& run);

/// Scaling-law fit of one run: AUC vs tokens for ladders, knee + below-knee
/// affine fit on AUC vs nominal pixels for resolution sweeps.
struct RunFit {
  std::string model;
  std::string device;
  std::string run_id;
  std::string x;          // "tokens" | "pixels"
  std::optional<LinearFit> fit;
  std::optional<KneeFit> knee;
};

RunFit fit_run(const RunArtifacts& run);

struct ReportOutput {
  std::vector<std::filesystem::path> files;
  /// "file:row:column <- run_dir/records.json#records[i].field" lines.
  std::vector<std::string> provenance;
};

/// Writes energy_table.csv, fits.json, per-figure data CSVs, four SVG plots,
/// comparisons.csv (when comparisons are given) and summary.md into out_dir.
/// Throws Error(input) when `runs` is empty. Output is byte-identical for
/// identical inputs.
ReportOutput emit_summary(const std::vector<RunArtifacts>& runs, const std::vector<ComparisonReport>& comparisons,
                          const std::filesystem::path& out_dir, bool write_provenance = false);

}  // namespace cpulab
