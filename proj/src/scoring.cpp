// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpulab/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cpulab/error.hpp"
#include "cpulab/process.hpp"

namespace cpulab {
namespace {

std::map<std::string, int> term_counts(std::string_view text) {
  std::map<std::string, int> tf;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) ++tf[cur];
    cur.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else {
      flush();
    }
  }
  flush();
  return tf;
}

std::vector<ScoreResult> lexical_batch(const std::vector<ScoreRequest>& requests) {
  std::vector<ScoreResult> out;
  out.reserve(requests.size());
  for (const auto& r : requests) {
    const bool degenerate = is_degenerate(r.candidate);
    out.push_back({r.id, r.candidate.empty() ? 0.0 : lexical_similarity(r.candidate, r.reference), degenerate});
  }
  return out;
}

}  // namespace

double lexical_similarity(std::string_view a, std::string_view b) {
  const auto ta = term_counts(a);
  const auto tb = term_counts(b);
  if (ta.empty() || tb.empty()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [term, n] : ta) {
    na += static_cast<double>(n) * n;
    if (auto it = tb.find(term); it != tb.end()) dot += static_cast<double>(n) * it->second;
  }
  for (const auto& [term, n] : tb) nb += static_cast<double>(n) * n;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

bool is_degenerate(std::string_view text) {
  std::map<std::string_view, int> counts;
  int total = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) {
      ++counts[text.substr(start, i - start)];
      ++total;
    }
  }
  if (total < 5) return true;
  int top = 0;
  for (const auto& [tok, n] : counts) top = std::max(top, n);
  return static_cast<double>(top) / total > 0.5;
}

ScoreBatch score_batch(const std::vector<ScoreRequest>& requests,
                       const std::optional<std::vector<std::string>>& scorer_command) {
  ScoreBatch batch;
  if (!scorer_command || scorer_command->empty()) {
    batch.results = lexical_batch(requests);
    batch.scorer = kLexicalScorer;
    batch.fallback = true;
    batch.fallback_reason = "no scorer configured";
    return batch;
  }

  auto fall_back = [&](std::string reason) {
    batch.results = lexical_batch(requests);
    batch.scorer = kLexicalScorer;
    batch.fallback = true;
    batch.fallback_reason = std::move(reason);
    return batch;
  };

  std::string input;
  for (const auto& r : requests) {
    input += nlohmann::json{{"id", r.id}, {"candidate", r.candidate}, {"reference", r.reference}}.dump();
    input += '\n';
  }
  ProcessResult proc;
  try {
    proc = run_process(*scorer_command, input);
  } catch (const Error& e) {
    return fall_back(e.what());
  }
  if (!proc.ok()) return fall_back("scorer exited with status " + std::to_string(proc.exit_code));

  std::map<std::size_t, ScoreResult> by_id;
  std::istringstream lines(proc.out);
  std::string line;
  while (std::getline(lines, line)) {
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j.contains("score")) continue;
    if (!j["score"].is_number()) continue;
    ScoreResult r;
    r.id = j["id"].get<std::size_t>();
    r.score = j["score"].get<double>();
    r.degenerate = j.value("degenerate", false);
    if (!(r.score >= 0.0 && r.score <= 1.0)) return fall_back("scorer returned a score outside [0, 1]");
    by_id[r.id] = r;
  }
  for (const auto& req : requests) {
    auto it = by_id.find(req.id);
    if (it == by_id.end()) return fall_back("scorer gave no answer for id " + std::to_string(req.id));
    ScoreResult r = it->second;
    r.degenerate = r.degenerate || is_degenerate(req.candidate);
    batch.results.push_back(r);
  }
  for (const auto& arg : *scorer_command) {
    if (!batch.scorer.empty()) batch.scorer += ' ';
    batch.scorer += std::filesystem::path(arg).filename().string();
  }
  return batch;
}

OutlierRemoval symmetric_outlier_removal(const std::vector<ScoreResult>& a, const std::vector<ScoreResult>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::input, "score lists differ in length (" + std::to_string(a.size()) + " vs " +
                                      std::to_string(b.size()) + ")");
  }
  OutlierRemoval out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].degenerate || b[i].degenerate) {
      out.removed.push_back(i);
      continue;
    }
    out.a.scores.push_back(a[i].score);
    out.b.scores.push_back(b[i].score);
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  out.a.mean = mean(out.a.scores);
  out.b.mean = mean(out.b.scores);
  out.a.removed = out.removed;
  out.b.removed = out.removed;
  return out;
}

}  // namespace cpulab
