// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpulab/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "cpulab/error.hpp"
#include "cpulab/svg_plot.hpp"
#include "cpulab/trace_io.hpp"
#include "json_io.hpp"

namespace cpulab {
namespace {

namespace fs = std::filesystem;

std::string cell(const std::optional<double>& v, int precision = 6) {
  return v ? format_double(*v, precision) : std::string();
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string label_of(const RunArtifacts& run) {
  const std::string model = run.meta.model_label.empty() ? run.meta.model_ref : run.meta.model_label;
  return model + " @ " + run.meta.device;
}

std::string model_of(const RunArtifacts& run) {
  return run.meta.model_label.empty() ? run.meta.model_ref : run.meta.model_label;
}

std::string records_ref(const RunArtifacts& run) { return (run.dir / "records.json").string(); }

void write_text(const fs::path& path, const std::string& text, ReportOutput& out) {
  std::ofstream f(path, std::ios::trunc | std::ios::binary);
  if (!f) throw Error(ErrorCode::io, "cannot write " + path.string());
  f << text;
  out.files.push_back(path);
}

std::string index_list(const std::vector<std::size_t>& idx) {
  std::string s;
  for (auto i : idx) s += (s.empty() ? "" : ",") + std::to_string(i);
  return "[" + s + "]";
}

}  // namespace

EnergyRow make_energy_row(std::string model, std::string device, const std::vector<double>& durations,
                          const std::vector<EnergyMetrics>& energy) {
  if (!energy.empty() && energy.size() != durations.size()) {
    throw Error(ErrorCode::mismatch, "energy figures do not match the prompt count");
  }
  EnergyRow row;
  row.model = std::move(model);
  row.device = std::move(device);
  row.prompts = durations.size();
  if (durations.empty()) return row;
  double sum = 0.0;
  for (double d : durations) {
    sum += d;
    row.max_duration_s = std::max(row.max_duration_s, d);
  }
  row.mean_duration_s = sum / static_cast<double>(durations.size());
  if (energy.empty()) return row;

  double peak = 0.0, bound_sum = 0.0, integrated_sum = 0.0;
  for (const auto& e : energy) {
    peak = std::max(peak, e.max_power_w);
    bound_sum += e.wh_max_bound;
    integrated_sum += e.wh_integrated;
  }
  row.max_power_w = peak;
  row.wh_per_prompt = peak * row.mean_duration_s / 3600.0;
  row.wh_per_prompt_max_duration = peak * row.max_duration_s / 3600.0;
  row.wh_per_run = bound_sum;
  row.wh_integrated_run = integrated_sum;
  row.wh_integrated_mean = integrated_sum / static_cast<double>(energy.size());
  return row;
}

EnergyRow energy_row(const RunArtifacts& run) {
  std::vector<double> durations;
  std::vector<EnergyMetrics> energy;
  bool all_energy = true;
  for (const auto& rec : run.records) {
    if (!rec.auc) continue;
    durations.push_back(rec.auc->duration_s);
    if (rec.energy) {
      energy.push_back(*rec.energy);
    } else {
      all_energy = false;
    }
  }
  if (!all_energy) energy.clear();
  EnergyRow row = make_energy_row(model_of(run), run.meta.device, durations, energy);
  row.run_id = run.meta.run_id;
  return row;
}

RunFit fit_run(const RunArtifacts& run) {
  RunFit f;
  f.model = model_of(run);
  f.device = run.meta.device;
  f.run_id = run.meta.run_id;
  std::vector<Point> pts;
  const bool by_pixels = run.meta.sweep_kind == "resolution";
  f.x = by_pixels ? "pixels" : "tokens";
  for (const auto& rec : run.records) {
    if (!rec.auc) continue;
    const double x = by_pixels && rec.resolution ? static_cast<double>(effective_pixels(*rec.resolution))
                                                 : static_cast<double>(rec.tokens_in);
    pts.push_back({x, rec.auc->cpu_auc});
  }
  try {
    if (by_pixels && pts.size() >= 4) {
      f.knee = run.meta.clamp ? detect_knee(pts, *run.meta.clamp) : detect_knee(pts);
      f.fit = f.knee->below_fit;
    } else if (pts.size() >= 2) {
      f.fit = fit_linear(pts);
    }
  } catch (const Error&) {
    // degenerate x values: leave the fit empty
  }
  return f;
}

ReportOutput emit_summary(const std::vector<RunArtifacts>& runs, const std::vector<ComparisonReport>& comparisons,
                          const fs::path& out_dir, bool write_provenance) {
  if (runs.empty()) throw Error(ErrorCode::input, "report needs at least one run");
  fs::create_directories(out_dir);
  ReportOutput out;
  auto& prov = out.provenance;

  // Energy table
  {
    std::ostringstream t;
    t << "model,device,run_id,prompts,max_power_w,mean_duration_s,max_duration_s,wh_per_prompt,"
         "wh_per_prompt_max_duration,wh_per_run,wh_integrated_mean,wh_integrated_run\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const EnergyRow row = energy_row(runs[i]);
      t << csv_text(row.model) << ',' << csv_text(row.device) << ',' << csv_text(row.run_id) << ',' << row.prompts
        << ',' << cell(row.max_power_w, 3) << ',' << format_double(row.mean_duration_s, 3) << ','
        << format_double(row.max_duration_s, 3) << ',' << cell(row.wh_per_prompt) << ','
        << cell(row.wh_per_prompt_max_duration) << ',' << cell(row.wh_per_run) << ','
        << cell(row.wh_integrated_mean) << ',' << cell(row.wh_integrated_run) << '\n';
      std::vector<std::size_t> used;
      for (const auto& rec : runs[i].records) {
        if (rec.auc) used.push_back(rec.index);
      }
      const std::string src = records_ref(runs[i]) + "#records" + index_list(used);
      const std::string r = "energy_table.csv:row" + std::to_string(i + 1);
      prov.push_back(r + ":max_power_w <- max of " + src + ".energy.max_power_w");
      prov.push_back(r + ":mean_duration_s <- mean of " + src + ".auc.duration_s");
      prov.push_back(r + ":max_duration_s <- max of " + src + ".auc.duration_s");
      prov.push_back(r + ":wh_per_prompt <- max_power_w * mean_duration_s / 3600");
      prov.push_back(r + ":wh_per_prompt_max_duration <- max_power_w * max_duration_s / 3600");
      prov.push_back(r + ":wh_per_run <- sum of " + src + ".energy.wh_max_bound");
      prov.push_back(r + ":wh_integrated_mean <- mean of " + src + ".energy.wh_integrated");
      prov.push_back(r + ":wh_integrated_run <- sum of " + src + ".energy.wh_integrated");
    }
    write_text(out_dir / "energy_table.csv", t.str(), out);
  }

  // Fits
  {
    json fits = json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const RunFit f = fit_run(runs[i]);
      json j = {{"model", f.model}, {"device", f.device}, {"run_id", f.run_id}, {"x", f.x}};
      j["a"] = f.fit ? json(f.fit->a) : json();
      j["b"] = f.fit ? json(f.fit->b) : json();
      j["r2"] = f.fit ? json(f.fit->r2) : json();
      j["n"] = f.fit ? json(f.fit->n) : json();
      j["knee_pixels"] = f.knee ? json(f.knee->knee_pixels) : json();
      j["c_flat"] = f.knee ? json(f.knee->c_flat) : json();
      j["knee_confident"] = f.knee ? json(f.knee->confident) : json();
      fits.push_back(j);
      prov.push_back("fits.json[" + std::to_string(i) + "] <- " + records_ref(runs[i]) + "#records[*].auc.cpu_auc vs " +
                     (f.x == "pixels" ? "records[*].resolution" : "records[*].tokens_in"));
    }
    write_text(out_dir / "fits.json", fits.dump(2) + "\n", out);
  }

  // Figure data and plots
  struct Figure {
    std::string stem, title, x_label, y_label;
    bool by_pixels;
    std::optional<double> (*y)(const StepRecord&);
  };
  const Figure figures[] = {
      {"auc_vs_tokens", "CPU AUC vs input tokens", "input tokens", "CPU AUC (%·s)", false,
       [](const StepRecord& r) -> std::optional<double> {
         return r.auc ? std::optional(r.auc->cpu_auc) : std::nullopt;
       }},
      {"auc_vs_pixels", "CPU AUC vs image pixels", "nominal pixels", "CPU AUC (%·s)", true,
       [](const StepRecord& r) -> std::optional<double> {
         return r.auc ? std::optional(r.auc->cpu_auc) : std::nullopt;
       }},
      {"tps_vs_pixels", "Throughput vs image pixels", "nominal pixels", "tokens / s", true,
       [](const StepRecord& r) -> std::optional<double> {
         return r.auc ? std::optional(r.auc->throughput_tps) : std::nullopt;
       }},
      {"accuracy_vs_pixels", "Accuracy vs image pixels", "nominal pixels", "similarity", true,
       [](const StepRecord& r) -> std::optional<double> { return r.accuracy; }},
  };
  for (const auto& fig : figures) {
    PlotSpec plot{fig.title, fig.x_label, fig.y_label, {}};
    std::ostringstream data;
    data << "model,device,run_id,step," << (fig.by_pixels ? "nominal_pixels,effective_pixels" : "tokens_in") << ",y\n";
    std::size_t row = 0;
    for (const auto& run : runs) {
      if ((run.meta.sweep_kind == "resolution") != fig.by_pixels) continue;
      PlotSeries series{label_of(run), {}};
      for (const auto& rec : run.records) {
        const auto y = fig.y(rec);
        if (!y || rec.flagged) continue;
        if (fig.by_pixels && !rec.resolution) continue;
        const double x = fig.by_pixels ? static_cast<double>(effective_pixels(*rec.resolution))
                                       : static_cast<double>(rec.tokens_in);
        data << csv_text(model_of(run)) << ',' << csv_text(run.meta.device) << ',' << csv_text(run.meta.run_id)
             << ',' << rec.index << ',';
        if (fig.by_pixels) {
          data << effective_pixels(*rec.resolution) << ','
               << (rec.effective ? std::to_string(effective_pixels(*rec.effective)) : "") << ',';
        } else {
          data << rec.tokens_in << ',';
        }
        data << format_double(*y, 6) << '\n';
        series.points.push_back({x, *y});
        prov.push_back("fig_" + fig.stem + ".csv:row" + std::to_string(++row) + " <- " + records_ref(run) +
                       "#records[" + std::to_string(rec.index) + "]");
      }
      if (!series.points.empty()) plot.series.push_back(std::move(series));
    }
    write_text(out_dir / ("fig_" + fig.stem + ".csv"), data.str(), out);
    write_text(out_dir / ("fig_" + fig.stem + ".svg"), render_svg(plot), out);
  }

  // Comparisons
  if (!comparisons.empty()) {
    std::ostringstream per, sum;
    per << "base_model,comp_model,device,key,cpu_reduction_pct,ram_reduction_pct,wh_reduction_pct,speedup,"
           "comp_faster\n";
    sum << "base_model,comp_model,device,matched,unmatched,mean_cpu_reduction_pct,mean_ram_reduction_pct,"
           "mean_wh_reduction_pct,speedup,wins,accuracy_delta_pp,accuracy_removed\n";
    std::size_t row = 0;
    for (std::size_t c = 0; c < comparisons.size(); ++c) {
      const auto& cr = comparisons[c];
      for (const auto& in : cr.per_input) {
        per << csv_text(cr.base_model) << ',' << csv_text(cr.comp_model) << ',' << csv_text(cr.device) << ','
            << format_double(in.key, 0) << ',' << cell(in.cpu_reduction_pct, 3) << ','
            << cell(in.ram_reduction_pct, 3) << ',' << cell(in.wh_reduction_pct, 3) << ',' << cell(in.speedup, 4)
            << ',' << (in.comp_faster ? 1 : 0) << '\n';
        prov.push_back("comparisons.csv:row" + std::to_string(++row) + " <- comparison " + std::to_string(c) +
                       " key " + format_double(in.key, 0));
      }
      sum << csv_text(cr.base_model) << ',' << csv_text(cr.comp_model) << ',' << csv_text(cr.device) << ','
          << cr.matched << ',' << cr.unmatched << ',' << cell(cr.mean_cpu_reduction_pct, 3) << ','
          << cell(cr.mean_ram_reduction_pct, 3) << ',' << cell(cr.mean_wh_reduction_pct, 3) << ','
          << cell(cr.speedup, 4) << ',' << cr.wins << ',' << cell(cr.accuracy_delta_pp, 3) << ','
          << cr.accuracy_removed_keys.size() << '\n';
      prov.push_back("comparison_summary.csv:row" + std::to_string(c + 1) + " <- means over comparisons.csv rows of " +
                     cr.base_model + " vs " + cr.comp_model);
    }
    write_text(out_dir / "comparisons.csv", per.str(), out);
    write_text(out_dir / "comparison_summary.csv", sum.str(), out);
  }

  // Summary with footnotes
  {
    std::ostringstream md;
    md << "# Run summary\n\n";
    md << "| model | device | prompts | max W | mean s | Wh/prompt | Wh/run |\n";
    md << "|---|---|---|---|---|---|---|\n";
    for (const auto& run : runs) {
      const EnergyRow row = energy_row(run);
      md << "| " << row.model << " | " << row.device << " | " << row.prompts << " | " << cell(row.max_power_w, 1)
         << " | " << format_double(row.mean_duration_s, 1) << " | " << cell(row.wh_per_prompt, 3) << " | "
         << cell(row.wh_per_run, 2) << " |\n";
    }
    md << "\nWh/prompt is max power times mean prompt duration. Wh/run is the sum of per-prompt\n"
          "max-power bounds. energy_table.csv also lists the max-duration variant and the\n"
          "integrated (trapezoid) energy.\n";
    std::vector<std::string> flagged;
    std::vector<std::string> scorers;
    for (const auto& run : runs) {
      for (const auto& rec : run.records) {
        if (rec.flagged) flagged.push_back(label_of(run) + " step " + rec.input_key + ": " + rec.flag_reason);
      }
      if (run.meta.scorer != "none") scorers.push_back(label_of(run) + ": " + run.meta.scorer);
    }
    if (!scorers.empty()) {
      md << "\nAccuracy scorer:\n";
      for (const auto& s : scorers) md << "- " << s << '\n';
    }
    if (!flagged.empty()) {
      md << "\nFlagged steps (excluded from tables and fits):\n";
      for (const auto& s : flagged) md << "- " << s << '\n';
    }
    write_text(out_dir / "summary.md", md.str(), out);
  }

  if (write_provenance) {
    std::string text;
    for (const auto& line : prov) text += line + '\n';
    write_text(out_dir / "provenance.txt", text, out);
  }
  return out;
}

}  // namespace cpulab
