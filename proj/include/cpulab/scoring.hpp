// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cpulab {

struct ScoreRequest {
  std::size_t id = 0;
  std::string candidate;
  std::string reference;
};

struct ScoreResult {
  std::size_t id = 0;
  double score = 0.0;   // [0, 1]
  bool degenerate = false;
};

struct ScoreBatch {
  std::vector<ScoreResult> results;   // same order as the requests
  /// "lexical-fallback" or the external scorer's program name.
  std::string scorer;
  bool fallback = false;
  std::string fallback_reason;
};

inline constexpr std::string_view kLexicalScorer = "lexical-fallback";

/// Cosine similarity of lowercase term-frequency vectors; 0 when either side
/// has no terms.
double lexical_similarity(std::string_view a, std::string_view b);

/// Empty, fewer than 5 whitespace tokens, or one token making up more than
/// half of the text.
bool is_degenerate(std::string_view text);

/// Scores with the external line-delimited JSON scorer when a command is
/// given (one `{id, candidate, reference}` line per request on stdin, one
/// `{id, score, degenerate}` line per request on stdout). Any failure of the
/// scorer, including a nonzero exit, switches the whole batch to the lexical
/// fallback and marks it as such.
ScoreBatch score_batch(const std::vector<ScoreRequest>& requests,
                       const std::optional<std::vector<std::string>>& scorer_command = std::nullopt);

struct AccuracyCurve {
  std::vector<double> scores;
  double mean = 0.0;
  std::vector<std::size_t> removed;
};

struct OutlierRemoval {
  AccuracyCurve a;
  AccuracyCurve b;
  std::vector<std::size_t> removed;   // union, ascending
};

/// Drops every index flagged degenerate in either list from both lists.
/// Throws Error(input) on a length mismatch.
OutlierRemoval symmetric_outlier_removal(const std::vector<ScoreResult>& a, const std::vector<ScoreResult>& b);

}  // namespace cpulab
