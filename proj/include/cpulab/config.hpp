// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cpulab/orchestrator.hpp"
#include "cpulab/sampler.hpp"

namespace cpulab {

struct SweepConfig {
  std::string kind = "ladder";                        // "ladder" | "resolution"
  std::optional<std::filesystem::path> segments_file;  // blank-line separated segments
  int steps = 5;                                      // synthetic ladder length
  int words_per_segment = 50;
  std::optional<std::filesystem::path> image;
  int n = 20;
  int min_width = 96;
  std::optional<std::filesystem::path> prompt_template_file;
  ClampSpec clamp{};
};

/// Everything a run needs; loaded from a JSON document, then overridden by
/// command-line flags.
struct LabConfig {
  BackendSpec backend{};
  SamplerConfig sampler{};
  RunOptions run{};
  SweepConfig sweep{};
  std::optional<std::filesystem::path> artifact_root;
  std::optional<std::vector<std::string>> scorer_command;
};

/// Throws Error(not_found) for a missing file and Error(input) for malformed
/// JSON or unknown enum values. Relative paths inside the file resolve against
/// the file's directory.
LabConfig load_config(const std::filesystem::path& path);

LabConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});

/// Splits a command line on whitespace, honoring single and double quotes.
std::vector<std::string> split_command(const std::string& text);

/// Segments separated by blank lines.
std::vector<std::string> read_segments(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace cpulab
