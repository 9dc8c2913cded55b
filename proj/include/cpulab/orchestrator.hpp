// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cpulab/analysis.hpp"
#include "cpulab/clamp.hpp"
#include "cpulab/mock_cost.hpp"
#include "cpulab/sampler.hpp"
#include "cpulab/trace.hpp"
#include "cpulab/windowing.hpp"

namespace cpulab {

// ---------------------------------------------------------------------------
// Sweeps

struct PromptLadder {
  std::vector<std::string> segments;
  /// prompts[i] joins segments[0..i]; each extends the previous one.
  std::vector<std::string> prompts;
  /// Whitespace estimates until a backend reports real usage.
  std::vector<std::int64_t> token_counts;
  bool counts_from_backend = false;
};

inline constexpr std::string_view kSegmentSeparator = "\n\n";

PromptLadder build_prompt_ladder(std::vector<std::string> segments);

/// Synthetic ladder: `steps` segments of `words_per_segment` filler words.
PromptLadder synthetic_prompt_ladder(int steps, int words_per_segment);

struct ResolutionSweep {
  std::filesystem::path source_image;
  Resolution source{};
  std::vector<Resolution> steps;
  std::vector<std::filesystem::path> frames;
  std::string prompt_template;
  ClampSpec clamp{};
  std::string spacing = "linear-width";
};

/// Widths linearly spaced from the source width down to `min_width`, heights
/// following the source aspect. Throws Error(input) on n < 1, min_width out of
/// [1, width], or any step that fails to shrink the pixel count.
std::vector<Resolution> plan_resolution_steps(Resolution source, int n, int min_width);

/// Reads the image, plans the steps and writes one frame per step into
/// `frame_dir`. Throws Error(input) if the image cannot be read.
ResolutionSweep build_resolution_sweep(const std::filesystem::path& image, int n, int min_width,
                                       const std::filesystem::path& frame_dir,
                                       std::string prompt_template = {}, ClampSpec clamp = {});

using Sweep = std::variant<PromptLadder, ResolutionSweep>;

// ---------------------------------------------------------------------------
// Backends

enum class BackendMode { persistent_session, stateless_cli, mock };

std::string_view to_string(BackendMode mode);
std::optional<BackendMode> parse_backend_mode(std::string_view text);

/// How to reach an inference runtime. `command` is an argv template whose
/// elements may contain {model}, {prompt_file}, {prompt}, {image}, {width},
/// {height} and {max_tokens}.
struct BackendSpec {
  BackendMode mode = BackendMode::mock;
  std::string model_ref;
  std::vector<std::string> command;
  int max_tokens = 256;
  double timeout_s = 900.0;
  MockParams mock{};
};

/// In-process mock backend; needs no external files.
BackendSpec mock_backend(const MockParams& params);

struct StepInput {
  std::size_t index = 0;
  std::string prompt;
  std::optional<std::filesystem::path> image;
  std::optional<Resolution> resolution;
  int max_tokens = 256;
};

struct UsageCounts {
  std::optional<std::int64_t> prompt_tokens;
  std::optional<std::int64_t> completion_tokens;
};

struct Completion {
  std::string text;
  UsageCounts usage;
  std::string diagnostics;   // backend stderr
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual Completion infer(const StepInput& step) = 0;
  /// Number of runtime processes started so far (0 for the in-process mock).
  virtual int launches() const = 0;
  virtual void shutdown() {}
};

/// `work_dir` holds prompt files for stateless launches.
std::unique_ptr<Backend> make_backend(const BackendSpec& spec, const std::filesystem::path& work_dir);

std::vector<std::string> expand_command(const std::vector<std::string>& tmpl,
                                        const std::map<std::string, std::string>& vars);

/// Recognizes "[usage] prompt_tokens=N completion_tokens=M" and llama.cpp's
/// "prompt eval time = … / N tokens" / "eval time = … / M runs" lines.
UsageCounts parse_usage(std::string_view text);

/// Drops "[usage] …" lines from backend stdout.
std::string strip_usage_lines(std::string_view text);

// ---------------------------------------------------------------------------
// Runs

struct RunOptions {
  std::filesystem::path artifact_dir;
  double settle_s = 3.0;        // idle time after every step
  double pre_window_s = 3.0;    // idle time before the first step (baseline)
  DetectionParams detect{};
  std::string model_label;
};

struct StepRecord {
  std::size_t index = 0;
  std::string input_key;          // "P3" or "1024x576"
  std::optional<Resolution> resolution;
  std::optional<Resolution> effective;
  std::string output_text;
  std::string output_file;        // relative to the run directory
  std::int64_t tokens_in = 0;
  std::int64_t tokens_out = 0;
  bool tokens_from_backend = false;
  double t_issue = 0.0;
  double t_done = 0.0;
  std::optional<InferenceWindow> window;
  bool flagged = false;
  std::string flag_reason;
  std::optional<AucMetrics> auc;
  std::optional<EnergyMetrics> energy;
  std::optional<double> accuracy;
  bool degenerate = false;
};

struct RunMetadata {
  std::string run_id;
  std::string model_ref;
  std::string model_label;
  std::string device;
  std::string backend_mode;
  std::string sweep_kind;        // "ladder" | "resolution"
  std::string spacing;
  std::optional<ClampSpec> clamp;
  double rate_hz = 5.0;
  std::string scope = "system";
  int launches = 0;
  double settle_s = 0.0;
  double pre_window_s = 0.0;
  DetectionParams detect{};
  std::string scorer = "none";
  int ncpu = 1;
  int mock_threads = 0;
};

struct RunArtifacts {
  std::filesystem::path dir;
  RunMetadata meta;
  std::vector<StepRecord> records;
  ResourceTrace trace;
  std::optional<EnergyTrace> energy;
  std::optional<IdleBaseline> baseline;
  std::vector<InferenceWindow> detected;
};

/// Executes the sweep serially: baseline idle, then for every step issue the
/// prompt, capture the completion, settle. Steps are appended to
/// steps.jsonl (and the trace snapshot rewritten) as they finish, so a crash
/// loses at most the step in flight. Windows and metrics are computed from
/// the persisted data by analyze_run at the end.
RunArtifacts run_sweep(const BackendSpec& backend, const Sweep& sweep, const SamplerConfig& sampler,
                       const RunOptions& options);

/// Recomputes baseline, windows and per-step metrics from a run directory
/// and rewrites windows.csv and records.json.
RunArtifacts analyze_run(const std::filesystem::path& dir,
                         const std::optional<DetectionParams>& detect = std::nullopt);

/// Loads records.json (after analyze_run) plus traces.
RunArtifacts load_run(const std::filesystem::path& dir);

/// Writes records.json from the in-memory artifacts.
void save_records(const RunArtifacts& run);

enum class MatchKey { step, tokens, pixels };
std::optional<MatchKey> parse_match_key(std::string_view text);

/// Cost figures of the records that have metrics, keyed for compare_models.
RunMetrics to_run_metrics(const RunArtifacts& run, MatchKey key);

}  // namespace cpulab
