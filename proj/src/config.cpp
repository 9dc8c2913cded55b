// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpulab/config.hpp"

#include <fstream>
#include <sstream>

#include "cpulab/error.hpp"
#include "json_io.hpp"

namespace cpulab {
namespace {

namespace fs = std::filesystem;

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::vector<std::string> command_of(const json& j) {
  if (j.is_string()) return split_command(j.get<std::string>());
  return j.get<std::vector<std::string>>();
}

}  // namespace

LabConfig parse_config(const std::string& json_text, const fs::path& base_dir) {
  const json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorCode::input, "config is not a JSON object");

  LabConfig cfg;
  try {
    if (doc.contains("artifact_root")) cfg.artifact_root = resolve(base_dir, doc["artifact_root"].get<std::string>());
    cfg.backend.model_ref = doc.value("model", cfg.backend.model_ref);
    cfg.run.model_label = doc.value("model_label", cfg.run.model_label);
    cfg.sampler.device = doc.value("device", cfg.sampler.device);

    if (doc.contains("backend")) {
      const json& b = doc["backend"];
      if (b.contains("mode")) {
        auto mode = parse_backend_mode(b["mode"].get<std::string>());
        if (!mode) throw Error(ErrorCode::input, "unknown backend mode: " + b["mode"].dump());
        cfg.backend.mode = *mode;
      }
      if (b.contains("command")) cfg.backend.command = command_of(b["command"]);
      cfg.backend.max_tokens = b.value("max_tokens", cfg.backend.max_tokens);
      cfg.backend.timeout_s = b.value("timeout_s", cfg.backend.timeout_s);
      if (b.contains("mock")) {
        const json& m = b["mock"];
        MockParams& p = cfg.backend.mock;
        p.load_ms = m.value("load_ms", p.load_ms);
        p.per_token_ms = m.value("per_token_ms", p.per_token_ms);
        p.per_pixel_ns = m.value("per_pixel_ns", p.per_pixel_ns);
        if (m.contains("clamp")) p.clamp = m["clamp"].get<ClampSpec>();
        p.output_tokens = m.value("output_tokens", p.output_tokens);
        p.threads = m.value("threads", p.threads);
      }
    }

    if (doc.contains("sampler")) {
      const json& s = doc["sampler"];
      cfg.sampler.rate_hz = s.value("rate_hz", cfg.sampler.rate_hz);
      const std::string scope = s.value("scope", std::string("system"));
      if (scope == "system") {
        cfg.sampler.scope = SamplerScope::system;
      } else if (scope == "process-tree" || scope == "process_tree") {
        cfg.sampler.scope = SamplerScope::process_tree;
      } else {
        throw Error(ErrorCode::input, "unknown sampler scope: " + scope);
      }
      cfg.sampler.pid = s.value("pid", 0);
      if (s.contains("energy_source") && !s["energy_source"].is_null()) {
        cfg.sampler.energy_source = resolve(base_dir, s["energy_source"].get<std::string>());
      }
    }

    if (doc.contains("sweep")) {
      const json& s = doc["sweep"];
      SweepConfig& w = cfg.sweep;
      w.kind = s.value("kind", w.kind);
      if (w.kind != "ladder" && w.kind != "resolution") throw Error(ErrorCode::input, "unknown sweep kind: " + w.kind);
      if (s.contains("segments_file")) w.segments_file = resolve(base_dir, s["segments_file"].get<std::string>());
      w.steps = s.value("steps", w.steps);
      w.words_per_segment = s.value("words_per_segment", w.words_per_segment);
      if (s.contains("image")) w.image = resolve(base_dir, s["image"].get<std::string>());
      w.n = s.value("n", w.n);
      w.min_width = s.value("min_width", w.min_width);
      if (s.contains("prompt_template_file")) {
        w.prompt_template_file = resolve(base_dir, s["prompt_template_file"].get<std::string>());
      }
      if (s.contains("clamp")) w.clamp = s["clamp"].get<ClampSpec>();
    }

    if (doc.contains("run")) {
      const json& r = doc["run"];
      cfg.run.settle_s = r.value("settle_s", cfg.run.settle_s);
      cfg.run.pre_window_s = r.value("pre_window_s", cfg.run.pre_window_s);
    }
    if (doc.contains("detect")) cfg.run.detect = doc["detect"].get<DetectionParams>();
    if (doc.contains("scorer") && doc["scorer"].contains("command")) {
      cfg.scorer_command = command_of(doc["scorer"]["command"]);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::input, std::string("config: ") + e.what());
  }
  return cfg;
}

LabConfig load_config(const fs::path& path) {
  return parse_config(read_text_file(path), path.parent_path());
}

std::vector<std::string> split_command(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  bool have = false;
  char quote = 0;
  for (char c : text) {
    if (quote) {
      if (c == quote) {
        quote = 0;
      } else {
        cur += c;
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      have = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (have) out.push_back(std::move(cur));
      cur.clear();
      have = false;
    } else {
      cur += c;
      have = true;
    }
  }
  if (quote) throw Error(ErrorCode::input, "unterminated quote in command: " + text);
  if (have) out.push_back(std::move(cur));
  return out;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::not_found, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_segments(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::string> segments;
  std::string line, cur;
  auto flush = [&] {
    while (!cur.empty() && cur.back() == '\n') cur.pop_back();
    if (!cur.empty()) segments.push_back(cur);
    cur.clear();
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      flush();
    } else {
      cur += line;
      cur += '\n';
    }
  }
  flush();
  return segments;
}

}  // namespace cpulab
