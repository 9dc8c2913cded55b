// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

// nlohmann adapters for the value types persisted in run directories.

#pragma once

#include <filesystem>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "cpulab/error.hpp"
#include "cpulab/orchestrator.hpp"

namespace cpulab {

using nlohmann::json;

template <typename T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> opt_get(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

inline void to_json(json& j, const Resolution& r) { j = to_string(r); }
inline void from_json(const json& j, Resolution& r) {
  auto p = parse_resolution(j.get<std::string>());
  if (!p) throw Error(ErrorCode::input, "bad resolution: " + j.dump());
  r = *p;
}

inline void to_json(json& j, const ClampSpec& c) { j = to_string(c); }
inline void from_json(const json& j, ClampSpec& c) {
  auto p = parse_clamp(j.get<std::string>());
  if (!p) throw Error(ErrorCode::input, "bad clamp: " + j.dump());
  c = *p;
}

inline void to_json(json& j, const DetectionParams& d) {
  j = {{"smooth_span", d.smooth_span},         {"rise_threshold", d.rise_threshold},
       {"min_duration_s", d.min_duration_s},   {"min_gap_s", d.min_gap_s},
       {"hysteresis_sigmas", d.hysteresis_sigmas}, {"min_excess_pct", d.min_excess_pct}};
}
inline void from_json(const json& j, DetectionParams& d) {
  d.smooth_span = j.value("smooth_span", d.smooth_span);
  d.rise_threshold = j.value("rise_threshold", d.rise_threshold);
  d.min_duration_s = j.value("min_duration_s", d.min_duration_s);
  d.min_gap_s = j.value("min_gap_s", d.min_gap_s);
  d.hysteresis_sigmas = j.value("hysteresis_sigmas", d.hysteresis_sigmas);
  d.min_excess_pct = j.value("min_excess_pct", d.min_excess_pct);
}

inline void to_json(json& j, const InferenceWindow& w) {
  j = {{"prompt_id", w.prompt_id}, {"start_t", w.start_t}, {"end_t", w.end_t}};
}
inline void from_json(const json& j, InferenceWindow& w) {
  w.prompt_id = j.value("prompt_id", "");
  w.start_t = j.at("start_t").get<double>();
  w.end_t = j.at("end_t").get<double>();
}

inline void to_json(json& j, const AucMetrics& a) {
  j = {{"cpu_auc", a.cpu_auc},       {"ram_auc", a.ram_auc},     {"duration_s", a.duration_s},
       {"tokens_in", a.tokens_in},   {"tokens_out", a.tokens_out}, {"throughput_tps", a.throughput_tps}};
}
inline void from_json(const json& j, AucMetrics& a) {
  a.cpu_auc = j.at("cpu_auc").get<double>();
  a.ram_auc = j.at("ram_auc").get<double>();
  a.duration_s = j.at("duration_s").get<double>();
  a.tokens_in = j.at("tokens_in").get<std::int64_t>();
  a.tokens_out = j.at("tokens_out").get<std::int64_t>();
  a.throughput_tps = j.at("throughput_tps").get<double>();
}

inline void to_json(json& j, const EnergyMetrics& e) {
  j = {{"wh_integrated", e.wh_integrated}, {"wh_max_bound", e.wh_max_bound}, {"max_power_w", e.max_power_w},
       {"mean_power_w", e.mean_power_w},   {"duration_s", e.duration_s}};
}
inline void from_json(const json& j, EnergyMetrics& e) {
  e.wh_integrated = j.at("wh_integrated").get<double>();
  e.wh_max_bound = j.at("wh_max_bound").get<double>();
  e.max_power_w = j.at("max_power_w").get<double>();
  e.mean_power_w = j.at("mean_power_w").get<double>();
  e.duration_s = j.at("duration_s").get<double>();
}

inline void to_json(json& j, const IdleBaseline& b) {
  j = {{"cpu_pct", b.cpu_pct},       {"ram_mb", b.ram_mb},
       {"n_samples", b.n_samples},   {"dispersion", b.dispersion},
       {"ram_dispersion", b.ram_dispersion}};
}
inline void from_json(const json& j, IdleBaseline& b) {
  b.cpu_pct = j.at("cpu_pct").get<double>();
  b.ram_mb = j.at("ram_mb").get<double>();
  b.n_samples = j.at("n_samples").get<std::size_t>();
  b.dispersion = j.at("dispersion").get<double>();
  b.ram_dispersion = j.value("ram_dispersion", 0.0);
}

inline void to_json(json& j, const RunMetadata& m) {
  j = {{"run_id", m.run_id},
       {"model_ref", m.model_ref},
       {"model_label", m.model_label},
       {"device", m.device},
       {"backend_mode", m.backend_mode},
       {"sweep_kind", m.sweep_kind},
       {"spacing", m.spacing},
       {"clamp", opt_json(m.clamp)},
       {"rate_hz", m.rate_hz},
       {"scope", m.scope},
       {"launches", m.launches},
       {"settle_s", m.settle_s},
       {"pre_window_s", m.pre_window_s},
       {"detect", m.detect},
       {"scorer", m.scorer},
       {"ncpu", m.ncpu},
       {"mock_threads", m.mock_threads}};
}
inline void from_json(const json& j, RunMetadata& m) {
  m.run_id = j.value("run_id", "");
  m.model_ref = j.value("model_ref", "");
  m.model_label = j.value("model_label", "");
  m.device = j.value("device", "");
  m.backend_mode = j.value("backend_mode", "");
  m.sweep_kind = j.value("sweep_kind", "");
  m.spacing = j.value("spacing", "");
  m.clamp = opt_get<ClampSpec>(j, "clamp");
  m.rate_hz = j.value("rate_hz", 5.0);
  m.scope = j.value("scope", "system");
  m.launches = j.value("launches", 0);
  m.settle_s = j.value("settle_s", 0.0);
  m.pre_window_s = j.value("pre_window_s", 0.0);
  if (j.contains("detect")) m.detect = j["detect"].get<DetectionParams>();
  m.scorer = j.value("scorer", "none");
  m.ncpu = j.value("ncpu", 1);
  m.mock_threads = j.value("mock_threads", 0);
}

// Base fields written as soon as a step completes.
inline json step_json(const StepRecord& r) {
  return {{"index", r.index},
          {"input_key", r.input_key},
          {"resolution", opt_json(r.resolution)},
          {"effective", opt_json(r.effective)},
          {"output_file", r.output_file},
          {"tokens_in", r.tokens_in},
          {"tokens_out", r.tokens_out},
          {"tokens_from_backend", r.tokens_from_backend},
          {"t_issue", r.t_issue},
          {"t_done", r.t_done}};
}

inline void to_json(json& j, const StepRecord& r) {
  j = step_json(r);
  j["output_text"] = r.output_text;
  j["window"] = opt_json(r.window);
  j["flagged"] = r.flagged;
  j["flag_reason"] = r.flag_reason;
  j["auc"] = opt_json(r.auc);
  j["energy"] = opt_json(r.energy);
  j["accuracy"] = opt_json(r.accuracy);
  j["degenerate"] = r.degenerate;
}
inline void from_json(const json& j, StepRecord& r) {
  r.index = j.at("index").get<std::size_t>();
  r.input_key = j.at("input_key").get<std::string>();
  r.resolution = opt_get<Resolution>(j, "resolution");
  r.effective = opt_get<Resolution>(j, "effective");
  r.output_text = j.value("output_text", "");
  r.output_file = j.value("output_file", "");
  r.tokens_in = j.value("tokens_in", std::int64_t{0});
  r.tokens_out = j.value("tokens_out", std::int64_t{0});
  r.tokens_from_backend = j.value("tokens_from_backend", false);
  r.t_issue = j.at("t_issue").get<double>();
  r.t_done = j.at("t_done").get<double>();
  r.window = opt_get<InferenceWindow>(j, "window");
  r.flagged = j.value("flagged", false);
  r.flag_reason = j.value("flag_reason", "");
  r.auc = opt_get<AucMetrics>(j, "auc");
  r.energy = opt_get<EnergyMetrics>(j, "energy");
  r.accuracy = opt_get<double>(j, "accuracy");
  r.degenerate = j.value("degenerate", false);
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::not_found, "cannot open " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::input, "malformed JSON: " + path.string());
  return j;
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace cpulab
