// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpulab/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cpulab/analysis.hpp"
#include "cpulab/config.hpp"
#include "cpulab/error.hpp"
#include "cpulab/orchestrator.hpp"
#include "cpulab/report.hpp"
#include "cpulab/scoring.hpp"
#include "cpulab/trace_io.hpp"
#include "json_io.hpp"

namespace cpulab {
namespace {

namespace fs = std::filesystem;

constexpr const char* kArtifactRootEnv = "CPULAB_ARTIFACT_ROOT";

std::string num(double v, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

std::vector<Point> read_points_csv(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<Point> pts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::input, path.string() + ":" + std::to_string(lineno) + ": expected x,y");
    auto rest = std::string_view(line).substr(comma + 1);
    rest = rest.substr(0, rest.find(','));
    try {
      pts.push_back({parse_double(std::string_view(line).substr(0, comma)), parse_double(rest)});
    } catch (const Error&) {
      if (pts.empty() && lineno == 1) continue;  // header
      throw Error(ErrorCode::input, path.string() + ":" + std::to_string(lineno) + ": not numeric");
    }
  }
  return pts;
}

std::vector<Point> run_points(const RunArtifacts& run, bool by_pixels) {
  std::vector<Point> pts;
  for (const auto& rec : run.records) {
    if (!rec.auc) continue;
    if (by_pixels && !rec.resolution) continue;
    pts.push_back({by_pixels ? static_cast<double>(effective_pixels(*rec.resolution))
                             : static_cast<double>(rec.tokens_in),
                   rec.auc->cpu_auc});
  }
  return pts;
}

fs::path fresh_run_dir(const fs::path& root, const std::string& stem) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
  fs::path dir = root / (stem + "-" + stamp);
  for (int i = 2; fs::exists(dir); ++i) dir = root / (stem + "-" + stamp + "-" + std::to_string(i));
  return dir;
}

std::string safe_stem(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return s.empty() ? "run" : s;
}

void print_steps(const RunArtifacts& run, std::ostream& out) {
  out << "step\tkey\ttokens_in\ttokens_out\twindow_s\tcpu_auc\tram_auc\ttps\tstatus\n";
  for (const auto& r : run.records) {
    out << r.index + 1 << '\t' << r.input_key << '\t' << r.tokens_in << '\t' << r.tokens_out << '\t';
    if (r.auc) {
      out << format_double(r.auc->duration_s, 3) << '\t' << format_double(r.auc->cpu_auc, 3) << '\t'
          << format_double(r.auc->ram_auc, 3) << '\t' << format_double(r.auc->throughput_tps, 3) << '\t';
    } else {
      out << "-\t-\t-\t-\t";
    }
    out << (r.flagged ? "flagged: " + r.flag_reason : "ok") << '\n';
  }
}

struct DetectFlags {
  std::optional<int> smooth_span;
  std::optional<double> rise, min_duration, min_gap, sigmas, min_excess;

  void add(CLI::App* app) {
    app->add_option("--smooth-span", smooth_span, "Moving-average span in samples")->check(CLI::PositiveNumber);
    app->add_option("--rise", rise, "Derivative threshold to open a window (%/s)");
    app->add_option("--min-duration", min_duration, "Shortest window kept (s)");
    app->add_option("--min-gap", min_gap, "Idle time that closes a window (s)");
    app->add_option("--sigmas", sigmas, "Hysteresis band in baseline standard deviations");
    app->add_option("--min-excess", min_excess, "Minimum band above baseline (CPU %)");
  }
  bool any() const { return smooth_span || rise || min_duration || min_gap || sigmas || min_excess; }
  void apply(DetectionParams& d) const {
    if (smooth_span) d.smooth_span = *smooth_span;
    if (rise) d.rise_threshold = *rise;
    if (min_duration) d.min_duration_s = *min_duration;
    if (min_gap) d.min_gap_s = *min_gap;
    if (sigmas) d.hysteresis_sigmas = *sigmas;
    if (min_excess) d.min_excess_pct = *min_excess;
  }
};

struct SweepFlags {
  std::optional<std::string> config, backend, model, label, device, command, segments, image, prompt_template,
      clamp, scope, energy, out;
  std::optional<int> max_tokens, steps, words, n, min_width, output_tokens, threads, pid;
  std::optional<double> load_ms, per_token_ms, per_pixel_ns, rate, settle, pre_window, timeout;
  DetectFlags detect;
};

LabConfig sweep_config(const SweepFlags& f) {
  LabConfig cfg = f.config ? load_config(*f.config) : LabConfig{};
  if (f.backend) {
    auto mode = parse_backend_mode(*f.backend);
    if (!mode) throw Error(ErrorCode::input, "unknown backend: " + *f.backend);
    cfg.backend.mode = *mode;
  }
  if (f.model) cfg.backend.model_ref = *f.model;
  if (f.label) cfg.run.model_label = *f.label;
  if (f.device) cfg.sampler.device = *f.device;
  if (f.command) cfg.backend.command = split_command(*f.command);
  if (f.max_tokens) cfg.backend.max_tokens = *f.max_tokens;
  if (f.timeout) cfg.backend.timeout_s = *f.timeout;

  MockParams& m = cfg.backend.mock;
  if (cfg.backend.mode == BackendMode::mock && !f.config && !f.load_ms && !f.per_token_ms && !f.per_pixel_ns) {
    m.load_ms = 100.0;
    m.per_token_ms = 2.0;
    m.per_pixel_ns = 1000.0;
  }
  if (f.load_ms) m.load_ms = *f.load_ms;
  if (f.per_token_ms) m.per_token_ms = *f.per_token_ms;
  if (f.per_pixel_ns) m.per_pixel_ns = *f.per_pixel_ns;
  if (f.output_tokens) m.output_tokens = *f.output_tokens;
  if (f.threads) m.threads = *f.threads;

  SweepConfig& s = cfg.sweep;
  if (f.segments) {
    s.kind = "ladder";
    s.segments_file = *f.segments;
  }
  if (f.steps) s.steps = *f.steps;
  if (f.words) s.words_per_segment = *f.words;
  if (f.image) {
    s.kind = "resolution";
    s.image = *f.image;
  }
  if (f.n) s.n = *f.n;
  if (f.min_width) s.min_width = *f.min_width;
  if (f.prompt_template) s.prompt_template_file = *f.prompt_template;
  if (f.clamp) {
    auto c = parse_clamp(*f.clamp);
    if (!c) throw Error(ErrorCode::input, "bad clamp (want WxH): " + *f.clamp);
    s.clamp = *c;
    m.clamp = *c;
  }

  if (f.rate) cfg.sampler.rate_hz = *f.rate;
  if (f.scope) {
    if (*f.scope == "system") {
      cfg.sampler.scope = SamplerScope::system;
    } else if (*f.scope == "process-tree") {
      cfg.sampler.scope = SamplerScope::process_tree;
    } else {
      throw Error(ErrorCode::input, "unknown scope: " + *f.scope);
    }
  }
  if (f.pid) cfg.sampler.pid = *f.pid;
  if (f.energy) cfg.sampler.energy_source = *f.energy;
  if (f.settle) cfg.run.settle_s = *f.settle;
  if (f.pre_window) cfg.run.pre_window_s = *f.pre_window;
  f.detect.apply(cfg.run.detect);
  if (cfg.backend.model_ref.empty()) cfg.backend.model_ref = std::string(to_string(cfg.backend.mode));
  return cfg;
}

int cmd_sweep(const SweepFlags& f, std::ostream& out, std::ostream& err) {
  LabConfig cfg = sweep_config(f);
  fs::path dir;
  if (f.out) {
    dir = *f.out;
  } else {
    fs::path root = cfg.artifact_root.value_or("runs");
    if (const char* env = std::getenv(kArtifactRootEnv); env && *env) root = env;
    dir = fresh_run_dir(root, safe_stem(cfg.run.model_label.empty() ? cfg.backend.model_ref : cfg.run.model_label));
  }
  cfg.run.artifact_dir = dir;

  Sweep sweep;
  if (cfg.sweep.kind == "resolution") {
    if (!cfg.sweep.image) throw Error(ErrorCode::input, "resolution sweep needs --image");
    std::string tmpl = cfg.sweep.prompt_template_file ? read_text_file(*cfg.sweep.prompt_template_file) : "";
    sweep = build_resolution_sweep(*cfg.sweep.image, cfg.sweep.n, cfg.sweep.min_width, dir / "frames",
                                   std::move(tmpl), cfg.sweep.clamp);
  } else if (cfg.sweep.segments_file) {
    sweep = build_prompt_ladder(read_segments(*cfg.sweep.segments_file));
  } else {
    sweep = synthetic_prompt_ladder(cfg.sweep.steps, cfg.sweep.words_per_segment);
  }
  err << "[cpulab] run directory " << dir.string() << '\n';
  const RunArtifacts run = run_sweep(cfg.backend, sweep, cfg.sampler, cfg.run);
  out << "run: " << run.dir.string() << '\n';
  print_steps(run, out);
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cpulab: CPU inference profiling lab", "cpulab"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  app.footer(std::string("Environment: ") + kArtifactRootEnv +
             " sets the root directory for new run directories (default ./runs).");

  // ladder
  auto* ladder = app.add_subcommand("ladder", "Build a cumulative prompt ladder and print token estimates");
  std::optional<std::string> ladder_segments, ladder_out;
  int ladder_steps = 10, ladder_words = 50;
  ladder->add_option("--segments", ladder_segments, "Text file with blank-line separated segments")
      ->check(CLI::ExistingFile);
  ladder->add_option("--steps", ladder_steps, "Synthetic ladder length")->capture_default_str();
  ladder->add_option("--words", ladder_words, "Words per synthetic segment")->capture_default_str();
  ladder->add_option("--out", ladder_out, "Write the ladder as JSON");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run a prompt-ladder or resolution sweep against a backend");
  SweepFlags sf;
  sweep->add_option("--config", sf.config, "JSON config file (flags override it)")->check(CLI::ExistingFile);
  sweep->add_option("--backend", sf.backend, "mock | stateless | persistent (default mock)");
  sweep->add_option("--model", sf.model, "Model file passed as {model}");
  sweep->add_option("--label", sf.label, "Model label used in reports");
  sweep->add_option("--device", sf.device, "Device label (default: local)");
  sweep->add_option("--command", sf.command,
                    "Backend command template; placeholders {model} {prompt_file} {prompt} {image} {width} "
                    "{height} {max_tokens}");
  sweep->add_option("--max-tokens", sf.max_tokens, "Generation limit per step (default 256)");
  sweep->add_option("--timeout", sf.timeout, "Per-step backend timeout in seconds (default 900)");
  sweep->add_option("--segments", sf.segments, "Ladder segments file (blank-line separated)");
  sweep->add_option("--steps", sf.steps, "Synthetic ladder length (default 5)");
  sweep->add_option("--words", sf.words, "Words per synthetic segment (default 50)");
  sweep->add_option("--image", sf.image, "Source image; selects a resolution sweep");
  sweep->add_option("--n", sf.n, "Resolution steps (default 20)");
  sweep->add_option("--min-width", sf.min_width, "Smallest width of the sweep (default 96)");
  sweep->add_option("--prompt-template", sf.prompt_template, "Prompt used for every resolution step");
  sweep->add_option("--clamp", sf.clamp, "Preprocessing clamp WxH (default 1024x720)");
  sweep->add_option("--load-ms", sf.load_ms, "Mock: fixed cost per step (default 100)");
  sweep->add_option("--per-token-ms", sf.per_token_ms, "Mock: cost per input token (default 2)");
  sweep->add_option("--per-pixel-ns", sf.per_pixel_ns, "Mock: cost per effective pixel (default 1000)");
  sweep->add_option("--output-tokens", sf.output_tokens, "Mock: completion length (default 16)");
  sweep->add_option("--threads", sf.threads, "Mock: spinning threads (default: all cores)");
  sweep->add_option("--rate", sf.rate, "Sampling rate in Hz, 1..50 (default 5)");
  sweep->add_option("--scope", sf.scope, "system | process-tree (default system)");
  sweep->add_option("--pid", sf.pid, "Root process for process-tree scope");
  sweep->add_option("--energy", sf.energy, "Power-meter log to tail (\"t watts\" lines)");
  sweep->add_option("--settle", sf.settle, "Idle seconds after each step (default 3)");
  sweep->add_option("--pre-window", sf.pre_window, "Idle seconds before the first step (default 3)");
  sweep->add_option("--out", sf.out, "Run directory (default: <artifact root>/<label>-<time>)");
  sf.detect.add(sweep);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Recompute windows and metrics of a run directory");
  std::string analyze_dir;
  DetectFlags analyze_detect;
  analyze->add_option("run", analyze_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  analyze_detect.add(analyze);

  // fit
  auto* fit = app.add_subcommand("fit", "Fit AUC = a*x + b");
  std::optional<std::string> fit_input, fit_run_dir;
  bool fit_robust = false, fit_pixels = false;
  fit->add_option("--input", fit_input, "CSV of x,y points (header optional)")->check(CLI::ExistingFile);
  fit->add_option("--run", fit_run_dir, "Run directory (AUC vs tokens, or pixels with --pixels)")
      ->check(CLI::ExistingDirectory);
  fit->add_flag("--robust", fit_robust, "Theil-Sen instead of least squares");
  fit->add_flag("--pixels", fit_pixels, "With --run: x is nominal pixels");

  // knee
  auto* knee = app.add_subcommand("knee", "Locate the flat-then-drop knee of AUC vs pixels");
  std::optional<std::string> knee_input, knee_run_dir, knee_clamp;
  knee->add_option("--input", knee_input, "CSV of pixels,auc points")->check(CLI::ExistingFile);
  knee->add_option("--run", knee_run_dir, "Resolution-sweep run directory")->check(CLI::ExistingDirectory);
  knee->add_option("--clamp", knee_clamp, "Expected clamp WxH, reported as a discrepancy in grid steps");

  // compare
  auto* compare = app.add_subcommand("compare", "Compare two runs at matched inputs");
  std::string cmp_base, cmp_comp, cmp_key = "step";
  compare->add_option("--base", cmp_base, "Baseline run directory")->required()->check(CLI::ExistingDirectory);
  compare->add_option("--comp", cmp_comp, "Compared run directory")->required()->check(CLI::ExistingDirectory);
  compare->add_option("--key", cmp_key, "Match on step | tokens | pixels")->capture_default_str();

  // report
  auto* report = app.add_subcommand("report", "Write tables, figure data and SVG plots for runs");
  std::vector<std::string> report_runs, report_pairs;
  std::string report_out, report_key = "step";
  bool report_prov = false;
  report->add_option("runs", report_runs, "Run directories")->required()->check(CLI::ExistingDirectory);
  report->add_option("--out", report_out, "Output directory")->required();
  report->add_option("--pair", report_pairs, "Comparison BASE_DIR,COMP_DIR (repeatable)");
  report->add_option("--key", report_key, "Match key for --pair")->capture_default_str();
  report->add_flag("--provenance", report_prov, "Print and write the cell-to-record mapping");

  // score
  auto* score = app.add_subcommand("score", "Score run outputs against reference answers");
  std::string score_dir, score_ref;
  std::optional<std::string> score_cmd, score_config;
  score->add_option("run", score_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  score->add_option("--reference", score_ref, "Reference file (all steps) or directory of <key>.txt files")
      ->required()
      ->check(CLI::ExistingPath);
  score->add_option("--scorer", score_cmd, "Scorer command (line-delimited JSON); lexical fallback if absent");
  score->add_option("--config", score_config, "JSON config providing scorer.command")->check(CLI::ExistingFile);

  if (args.size() <= 1) {
    err << app.help();
    return kExitUsage;
  }
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run 'cpulab --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (*ladder) {
      const PromptLadder l = ladder_segments ? build_prompt_ladder(read_segments(*ladder_segments))
                                             : synthetic_prompt_ladder(ladder_steps, ladder_words);
      out << "prompt\ttokens_est\n";
      for (std::size_t i = 0; i < l.prompts.size(); ++i) out << 'P' << i + 1 << '\t' << l.token_counts[i] << '\n';
      if (ladder_out) {
        write_json_file(*ladder_out, {{"segments", l.segments},
                                      {"separator", std::string(kSegmentSeparator)},
                                      {"prompts", l.prompts},
                                      {"token_counts", l.token_counts}});
      }
    } else if (*sweep) {
      return cmd_sweep(sf, out, err);
    } else if (*analyze) {
      std::optional<DetectionParams> d;
      if (analyze_detect.any()) {
        DetectionParams p = load_run(analyze_dir).meta.detect;
        analyze_detect.apply(p);
        d = p;
      }
      const RunArtifacts run = analyze_run(analyze_dir, d);
      out << "run: " << run.dir.string() << "  windows: " << run.detected.size() << '\n';
      print_steps(run, out);
    } else if (*fit) {
      if (fit_input.has_value() == fit_run_dir.has_value()) {
        err << "error: fit needs exactly one of --input or --run\n";
        return kExitUsage;
      }
      const std::vector<Point> pts =
          fit_input ? read_points_csv(*fit_input) : run_points(load_run(*fit_run_dir), fit_pixels);
      const LinearFit lf = fit_linear(pts, fit_robust ? FitMethod::theil_sen : FitMethod::ols);
      out << "a = " << num(lf.a, 10) << "\nb = " << num(lf.b, 10) << "\nr2 = " << num(lf.r2, 6)
          << "\nn = " << lf.n << '\n';
    } else if (*knee) {
      if (knee_input.has_value() == knee_run_dir.has_value()) {
        err << "error: knee needs exactly one of --input or --run\n";
        return kExitUsage;
      }
      std::optional<ClampSpec> hint;
      if (knee_clamp) {
        hint = parse_clamp(*knee_clamp);
        if (!hint) throw Error(ErrorCode::input, "bad clamp (want WxH): " + *knee_clamp);
      }
      std::vector<Point> pts;
      if (knee_input) {
        pts = read_points_csv(*knee_input);
      } else {
        const RunArtifacts run = load_run(*knee_run_dir);
        pts = run_points(run, true);
        if (!hint) hint = run.meta.clamp;
      }
      const KneeFit k = hint ? detect_knee(pts, *hint) : detect_knee(pts);
      out << "knee_pixels = " << num(k.knee_pixels, 10) << "\nc_flat = " << num(k.c_flat, 10)
          << "\nflat_points = " << k.flat_count << "\nbelow_slope = " << num(k.below_fit.a, 10)
          << "\nbelow_intercept = " << num(k.below_fit.b, 10) << "\nconfident = " << (k.confident ? "yes" : "no")
          << '\n';
      if (k.hint_discrepancy_steps) {
        out << "clamp_pixels = " << num(*k.hint_pixels, 10)
            << "\ndiscrepancy_steps = " << num(*k.hint_discrepancy_steps, 4) << '\n';
      }
    } else if (*compare) {
      const auto key = parse_match_key(cmp_key);
      if (!key) throw Error(ErrorCode::input, "unknown key: " + cmp_key);
      const ComparisonReport rep =
          compare_models(to_run_metrics(load_run(cmp_base), *key), to_run_metrics(load_run(cmp_comp), *key));
      auto opt = [](const std::optional<double>& v) { return v ? num(*v, 4) : std::string("-"); };
      out << rep.base_model << " -> " << rep.comp_model << " (" << rep.device << ")\n";
      out << "key\tcpu_red_%\tram_red_%\twh_red_%\tspeedup\n";
      for (const auto& r : rep.per_input) {
        out << num(r.key) << '\t' << opt(r.cpu_reduction_pct) << '\t' << opt(r.ram_reduction_pct) << '\t'
            << opt(r.wh_reduction_pct) << '\t' << opt(r.speedup) << '\n';
      }
      out << "matched = " << rep.matched << "\nunmatched = " << rep.unmatched
          << "\nmean_cpu_reduction_pct = " << opt(rep.mean_cpu_reduction_pct)
          << "\nmean_ram_reduction_pct = " << opt(rep.mean_ram_reduction_pct)
          << "\nmean_wh_reduction_pct = " << opt(rep.mean_wh_reduction_pct) << "\nspeedup = " << opt(rep.speedup)
          << "\nwins = " << rep.wins << "/" << rep.matched << "\naccuracy_delta_pp = " << opt(rep.accuracy_delta_pp)
          << '\n';
    } else if (*report) {
      std::vector<RunArtifacts> runs;
      for (const auto& d : report_runs) runs.push_back(load_run(d));
      const auto key = parse_match_key(report_key);
      if (!key) throw Error(ErrorCode::input, "unknown key: " + report_key);
      std::vector<ComparisonReport> comps;
      for (const auto& pair : report_pairs) {
        const auto comma = pair.find(',');
        if (comma == std::string::npos) throw Error(ErrorCode::input, "--pair wants BASE_DIR,COMP_DIR");
        comps.push_back(compare_models(to_run_metrics(load_run(pair.substr(0, comma)), *key),
                                       to_run_metrics(load_run(pair.substr(comma + 1)), *key)));
      }
      const ReportOutput rep = emit_summary(runs, comps, report_out, report_prov);
      for (const auto& f : rep.files) out << f.string() << '\n';
      if (report_prov) {
        for (const auto& line : rep.provenance) out << line << '\n';
      }
    } else if (*score) {
      std::optional<std::vector<std::string>> command;
      if (score_config) command = load_config(*score_config).scorer_command;
      if (score_cmd) command = split_command(*score_cmd);
      RunArtifacts run = load_run(score_dir);
      std::vector<ScoreRequest> reqs;
      for (const auto& r : run.records) {
        const fs::path ref = fs::is_directory(score_ref) ? fs::path(score_ref) / (r.input_key + ".txt")
                                                         : fs::path(score_ref);
        reqs.push_back({r.index, r.output_text, read_text_file(ref)});
      }
      const ScoreBatch batch = score_batch(reqs, command);
      if (batch.fallback && command) err << "[cpulab] scorer unavailable (" << batch.fallback_reason << "), using lexical fallback\n";
      out << "scorer = " << batch.scorer << '\n';
      out << "step\tkey\tscore\tdegenerate\n";
      for (std::size_t i = 0; i < batch.results.size(); ++i) {
        run.records[i].accuracy = batch.results[i].score;
        run.records[i].degenerate = batch.results[i].degenerate;
        out << i + 1 << '\t' << run.records[i].input_key << '\t' << format_double(batch.results[i].score, 4) << '\t'
            << (batch.results[i].degenerate ? "yes" : "no") << '\n';
      }
      run.meta.scorer = batch.scorer;
      save_records(run);
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace cpulab
