// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpulab/orchestrator.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include "cpulab/error.hpp"
#include "cpulab/trace_io.hpp"
#include "json_io.hpp"

namespace cpulab {
namespace {

namespace fs = std::filesystem;

constexpr const char* kConfigFile = "config.json";
constexpr const char* kStepsFile = "steps.jsonl";
constexpr const char* kRecordsFile = "records.json";
constexpr const char* kTraceFile = "trace.txt";
constexpr const char* kEnergyFile = "energy.txt";
constexpr const char* kWindowsFile = "windows.csv";

constexpr const char* kDefaultVisionPrompt = "Describe every object in this image and how they relate to each other.";

void sleep_s(double s) {
  if (s > 0) std::this_thread::sleep_for(std::chrono::duration<double>(s));
}

std::vector<StepInput> step_inputs(const Sweep& sweep, int max_tokens, std::vector<std::string>& keys) {
  std::vector<StepInput> out;
  if (const auto* ladder = std::get_if<PromptLadder>(&sweep)) {
    for (std::size_t i = 0; i < ladder->prompts.size(); ++i) {
      out.push_back({i, ladder->prompts[i], std::nullopt, std::nullopt, max_tokens});
      keys.push_back("P" + std::to_string(i + 1));
    }
  } else {
    const auto& rs = std::get<ResolutionSweep>(sweep);
    const std::string prompt = rs.prompt_template.empty() ? kDefaultVisionPrompt : rs.prompt_template;
    for (std::size_t i = 0; i < rs.steps.size(); ++i) {
      StepInput in{i, prompt, std::nullopt, rs.steps[i], max_tokens};
      if (i < rs.frames.size()) in.image = rs.frames[i];
      out.push_back(std::move(in));
      keys.push_back(to_string(rs.steps[i]));
    }
  }
  if (out.empty()) throw Error(ErrorCode::input, "sweep has no steps");
  return out;
}

json sweep_json(const Sweep& sweep) {
  if (const auto* ladder = std::get_if<PromptLadder>(&sweep)) {
    return {{"kind", "ladder"}, {"segments", ladder->segments}, {"steps", ladder->prompts.size()}};
  }
  const auto& rs = std::get<ResolutionSweep>(sweep);
  json frames = json::array();
  for (const auto& f : rs.frames) frames.push_back(f.string());
  return {{"kind", "resolution"},   {"source_image", rs.source_image.string()},
          {"source", rs.source},    {"steps", rs.steps},
          {"frames", frames},       {"prompt_template", rs.prompt_template},
          {"clamp", rs.clamp},      {"spacing", rs.spacing}};
}

json backend_json(const BackendSpec& b) {
  json j = {{"mode", std::string(to_string(b.mode))},
            {"model_ref", b.model_ref},
            {"command", b.command},
            {"max_tokens", b.max_tokens},
            {"timeout_s", b.timeout_s}};
  if (b.mode == BackendMode::mock) {
    j["mock"] = {{"load_ms", b.mock.load_ms},           {"per_token_ms", b.mock.per_token_ms},
                 {"per_pixel_ns", b.mock.per_pixel_ns}, {"clamp", b.mock.clamp},
                 {"output_tokens", b.mock.output_tokens}, {"threads", b.mock.threads}};
  }
  return j;
}

void write_config(const fs::path& dir, const RunMetadata& meta, const BackendSpec& backend, const Sweep& sweep,
                  const SamplerConfig& sampler) {
  json sampler_j = {{"rate_hz", sampler.rate_hz},
                    {"scope", sampler.scope == SamplerScope::system ? "system" : "process-tree"},
                    {"pid", sampler.pid},
                    {"energy_source", sampler.energy_source ? json(sampler.energy_source->string()) : json()}};
  write_json_file(dir / kConfigFile,
                  {{"meta", meta}, {"backend", backend_json(backend)}, {"sweep", sweep_json(sweep)},
                   {"sampler", sampler_j}});
}

std::string output_name(std::size_t index) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "outputs/step_%02zu.txt", index);
  return buf;
}

std::string run_id_for(const fs::path& dir, const SamplerConfig& sampler) {
  if (!sampler.run_id.empty()) return sampler.run_id;
  auto name = fs::absolute(dir).lexically_normal().filename().string();
  return name.empty() ? "run" : name;
}

// Baseline estimation window: the configured idle lead-in, cut short so it
// never reaches the first issue.
double baseline_span(const RunArtifacts& run) {
  double span = run.meta.pre_window_s;
  if (!run.records.empty() && !run.trace.empty()) {
    const double lead = run.records.front().t_issue - run.trace.start_t() - 1.0 / run.meta.rate_hz;
    if (lead > 0) span = std::min(span, lead);
  }
  return span;
}

// All detected windows overlapping the step's issue/done interval, widened by
// one sample period; their hull is the step's window.
void match_windows(RunArtifacts& run) {
  const double pad = 1.0 / run.meta.rate_hz;
  std::vector<std::vector<std::size_t>> owners(run.detected.size());
  std::vector<std::vector<std::size_t>> hits(run.records.size());
  for (std::size_t r = 0; r < run.records.size(); ++r) {
    const double lo = run.records[r].t_issue - pad;
    const double hi = run.records[r].t_done + pad;
    for (std::size_t w = 0; w < run.detected.size(); ++w) {
      if (run.detected[w].end_t >= lo && run.detected[w].start_t <= hi) {
        hits[r].push_back(w);
        owners[w].push_back(r);
      }
    }
  }
  for (std::size_t r = 0; r < run.records.size(); ++r) {
    StepRecord& rec = run.records[r];
    rec.window.reset();
    rec.auc.reset();
    rec.energy.reset();
    rec.flagged = false;
    rec.flag_reason.clear();
    if (hits[r].empty()) {
      rec.flagged = true;
      rec.flag_reason = "no window detected";
      continue;
    }
    bool shared = false;
    for (auto w : hits[r]) shared = shared || owners[w].size() > 1;
    if (shared) {
      rec.flagged = true;
      rec.flag_reason = "window spans several steps";
      continue;
    }
    InferenceWindow hull = run.detected[hits[r].front()];
    for (auto w : hits[r]) {
      hull.start_t = std::min(hull.start_t, run.detected[w].start_t);
      hull.end_t = std::max(hull.end_t, run.detected[w].end_t);
    }
    hull.prompt_id = rec.input_key;
    rec.window = hull;
  }
}

void compute_metrics(RunArtifacts& run) {
  for (auto& rec : run.records) {
    if (!rec.window) continue;
    try {
      const AucPair a = auc_above_baseline(run.trace, *rec.window, *run.baseline);
      AucMetrics m;
      m.cpu_auc = a.cpu_auc;
      m.ram_auc = a.ram_auc;
      m.duration_s = rec.window->duration();
      m.tokens_in = rec.tokens_in;
      m.tokens_out = rec.tokens_out;
      m.throughput_tps = throughput(rec.tokens_out, *rec.window);
      rec.auc = m;
    } catch (const Error& e) {
      rec.flagged = true;
      rec.flag_reason = std::string("metrics unavailable: ") + e.what();
      continue;
    }
    if (run.energy) {
      try {
        rec.energy = energy_metrics(*run.energy, *rec.window);
      } catch (const Error&) {
        // meter log does not cover this window
      }
    }
  }
}

RunArtifacts load_persisted(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::not_found, "no run directory: " + dir.string());
  RunArtifacts run;
  run.dir = dir;
  const json cfg = read_json_file(dir / kConfigFile);
  run.meta = cfg.at("meta").get<RunMetadata>();
  run.trace = load_resource_trace(dir / kTraceFile);
  if (fs::exists(dir / kEnergyFile)) run.energy = load_energy_trace(dir / kEnergyFile);
  return run;
}

}  // namespace

PromptLadder build_prompt_ladder(std::vector<std::string> segments) {
  if (segments.empty()) throw Error(ErrorCode::input, "prompt ladder needs at least one segment");
  PromptLadder ladder;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (count_whitespace_tokens(segments[i]) == 0) {
      throw Error(ErrorCode::input, "segment " + std::to_string(i + 1) + " is empty");
    }
    std::string prompt = i == 0 ? segments[i] : ladder.prompts.back() + std::string(kSegmentSeparator) + segments[i];
    ladder.token_counts.push_back(count_whitespace_tokens(prompt));
    ladder.prompts.push_back(std::move(prompt));
  }
  ladder.segments = std::move(segments);
  return ladder;
}

PromptLadder synthetic_prompt_ladder(int steps, int words_per_segment) {
  if (steps < 1 || words_per_segment < 1) {
    throw Error(ErrorCode::input, "synthetic ladder needs steps >= 1 and words >= 1");
  }
  std::vector<std::string> segments;
  for (int i = 0; i < steps; ++i) segments.push_back(filler_text(words_per_segment));
  return build_prompt_ladder(std::move(segments));
}

RunArtifacts run_sweep(const BackendSpec& backend, const Sweep& sweep, const SamplerConfig& sampler,
                       const RunOptions& options) {
  validate(sampler);
  if (options.artifact_dir.empty()) throw Error(ErrorCode::input, "artifact directory not set");
  const fs::path dir = options.artifact_dir;
  fs::create_directories(dir / "outputs");
  if (fs::exists(dir / kStepsFile)) throw Error(ErrorCode::state, "run directory already used: " + dir.string());

  std::vector<std::string> keys;
  const auto inputs = step_inputs(sweep, backend.max_tokens, keys);

  RunMetadata meta;
  meta.run_id = run_id_for(dir, sampler);
  meta.model_ref = backend.model_ref;
  meta.model_label = options.model_label.empty() ? backend.model_ref : options.model_label;
  meta.device = sampler.device.empty() ? "local" : sampler.device;
  meta.backend_mode = std::string(to_string(backend.mode));
  meta.rate_hz = sampler.rate_hz;
  meta.scope = sampler.scope == SamplerScope::system ? "system" : "process-tree";
  meta.settle_s = options.settle_s;
  meta.pre_window_s = options.pre_window_s;
  meta.detect = options.detect;
  meta.ncpu = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (backend.mode == BackendMode::mock) meta.mock_threads = resolve_threads(backend.mock.threads);
  if (const auto* rs = std::get_if<ResolutionSweep>(&sweep)) {
    meta.sweep_kind = "resolution";
    meta.spacing = rs->spacing;
    meta.clamp = rs->clamp;
  } else {
    meta.sweep_kind = "ladder";
    meta.spacing = "cumulative";
  }
  write_config(dir, meta, backend, sweep, sampler);

  auto engine = make_backend(backend, dir / "backend");
  SamplerConfig scfg = sampler;
  scfg.run_id = meta.run_id;
  scfg.device = meta.device;
  SamplerHandle handle = start_sampling(scfg);

  auto persist_traces = [&](const SamplerResult& res) {
    save_resource_trace(dir / kTraceFile, res.resources);
    if (res.energy) save_energy_trace(dir / kEnergyFile, *res.energy);
  };

  std::ofstream steps_out(dir / kStepsFile, std::ios::app);
  if (!steps_out) throw Error(ErrorCode::io, "cannot write " + (dir / kStepsFile).string());
  try {
    sleep_s(options.pre_window_s);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const StepInput& in = inputs[i];
      StepRecord rec;
      rec.index = i;
      rec.input_key = keys[i];
      rec.resolution = in.resolution;
      if (in.resolution) {
        const ClampSpec clamp = backend.mode == BackendMode::mock ? backend.mock.clamp
                                : meta.clamp                     ? *meta.clamp
                                                                 : ClampSpec{};
        rec.effective = apply_clamp(*in.resolution, clamp);
      }
      rec.t_issue = handle.now();
      Completion c = engine->infer(in);
      rec.t_done = handle.now();

      rec.output_text = c.text;
      rec.output_file = output_name(i);
      std::ofstream(dir / rec.output_file, std::ios::trunc) << c.text;
      rec.tokens_from_backend = c.usage.prompt_tokens.has_value();
      rec.tokens_in = c.usage.prompt_tokens.value_or(count_whitespace_tokens(in.prompt));
      rec.tokens_out = c.usage.completion_tokens.value_or(count_whitespace_tokens(c.text));

      steps_out << step_json(rec).dump() << '\n' << std::flush;
      save_resource_trace(dir / kTraceFile, handle.snapshot());
      std::clog << "[cpulab] step " << i + 1 << "/" << inputs.size() << " " << rec.input_key << " "
                << format_double(rec.t_done - rec.t_issue, 3) << " s\n";
      sleep_s(options.settle_s);
    }
  } catch (...) {
    steps_out.close();
    if (handle.active()) persist_traces(handle.stop());
    engine->shutdown();
    throw;
  }
  steps_out.close();
  engine->shutdown();
  persist_traces(handle.stop());

  meta.launches = engine->launches();
  write_config(dir, meta, backend, sweep, sampler);
  return analyze_run(dir, options.detect);
}

// Process-tree readings move in whole clock ticks; a lone tick of harness work
// between steps is below what the trace can resolve.
static DetectionParams effective_detection(const RunMetadata& meta) {
  DetectionParams p = meta.detect;
  if (meta.scope == "process-tree") {
    const double hz = static_cast<double>(::sysconf(_SC_CLK_TCK));
    const double tick_pct = 100.0 * meta.rate_hz / (hz * std::max(1, meta.ncpu));
    p.min_excess_pct = std::max(p.min_excess_pct, 1.5 * tick_pct);
  }
  return p;
}

RunArtifacts analyze_run(const fs::path& dir, const std::optional<DetectionParams>& detect) {
  RunArtifacts run = load_persisted(dir);
  if (detect) run.meta.detect = *detect;

  {
    std::ifstream in(dir / kStepsFile);
    if (!in) throw Error(ErrorCode::not_found, "no step log in " + dir.string());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) continue;  // torn final line after a crash
      StepRecord rec = j.get<StepRecord>();
      if (!rec.output_file.empty()) {
        std::ifstream text(dir / rec.output_file);
        rec.output_text.assign(std::istreambuf_iterator<char>(text), std::istreambuf_iterator<char>());
      }
      run.records.push_back(std::move(rec));
    }
  }

  // Keep accuracy annotations added by an earlier `score`.
  if (fs::exists(dir / kRecordsFile)) {
    const json old = read_json_file(dir / kRecordsFile);
    if (old.contains("meta")) run.meta.scorer = old["meta"].value("scorer", run.meta.scorer);
    for (const auto& j : old.value("records", json::array())) {
      const auto idx = j.at("index").get<std::size_t>();
      if (idx < run.records.size()) {
        run.records[idx].accuracy = opt_get<double>(j, "accuracy");
        run.records[idx].degenerate = j.value("degenerate", false);
      }
    }
  }

  run.baseline = estimate_idle_baseline(run.trace, baseline_span(run));
  run.detected = detect_inference_windows(run.trace, *run.baseline, effective_detection(run.meta));
  match_windows(run);
  compute_metrics(run);

  save_windows_csv(dir / kWindowsFile, run.detected);
  save_records(run);
  write_json_file(dir / kConfigFile, [&] {
    json cfg = read_json_file(dir / kConfigFile);
    cfg["meta"] = run.meta;
    return cfg;
  }());
  return run;
}

RunArtifacts load_run(const fs::path& dir) {
  if (!fs::exists(dir / kRecordsFile)) return analyze_run(dir);
  RunArtifacts run = load_persisted(dir);
  const json j = read_json_file(dir / kRecordsFile);
  if (j.contains("meta")) run.meta = j["meta"].get<RunMetadata>();
  run.baseline = opt_get<IdleBaseline>(j, "baseline");
  run.records = j.at("records").get<std::vector<StepRecord>>();
  if (fs::exists(dir / kWindowsFile)) run.detected = load_windows_csv(dir / kWindowsFile);
  return run;
}

void save_records(const RunArtifacts& run) {
  write_json_file(run.dir / kRecordsFile,
                  {{"meta", run.meta}, {"baseline", opt_json(run.baseline)}, {"records", run.records}});
}

std::optional<MatchKey> parse_match_key(std::string_view text) {
  if (text == "step") return MatchKey::step;
  if (text == "tokens") return MatchKey::tokens;
  if (text == "pixels") return MatchKey::pixels;
  return std::nullopt;
}

RunMetrics to_run_metrics(const RunArtifacts& run, MatchKey key) {
  RunMetrics m;
  m.model = run.meta.model_label.empty() ? run.meta.model_ref : run.meta.model_label;
  m.device = run.meta.device;
  for (const auto& rec : run.records) {
    if (!rec.auc) continue;
    InputMetrics in;
    switch (key) {
      case MatchKey::step: in.key = static_cast<double>(rec.index + 1); break;
      case MatchKey::tokens: in.key = static_cast<double>(rec.tokens_in); break;
      case MatchKey::pixels:
        if (!rec.resolution) throw Error(ErrorCode::input, "run has no resolutions to match on pixels");
        in.key = static_cast<double>(effective_pixels(*rec.resolution));
        break;
    }
    in.cpu_auc = rec.auc->cpu_auc;
    in.ram_auc = rec.auc->ram_auc;
    in.tps = rec.auc->throughput_tps;
    if (rec.energy) in.wh = rec.energy->wh_max_bound;
    in.accuracy = rec.accuracy;
    in.degenerate = rec.degenerate;
    m.inputs.push_back(in);
  }
  return m;
}

}  // namespace cpulab
