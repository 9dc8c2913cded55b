// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cpulab/clamp.hpp"
#include "cpulab/error.hpp"

namespace cpulab {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct LinearFit {
  double a = 0.0;   // slope
  double b = 0.0;   // intercept
  double r2 = 0.0;
  std::size_t n = 0;
  std::vector<double> residuals;

  double operator()(double x) const { return a * x + b; }
};

enum class FitMethod { ols, theil_sen };

namespace detail {

inline void finish_fit(LinearFit& fit, std::span<const Point> pts) {
  double ybar = 0.0;
  for (const auto& p : pts) ybar += p.y;
  ybar /= static_cast<double>(pts.size());
  double sse = 0.0, sst = 0.0;
  fit.residuals.clear();
  fit.residuals.reserve(pts.size());
  for (const auto& p : pts) {
    const double r = p.y - fit(p.x);
    fit.residuals.push_back(r);
    sse += r * r;
    sst += (p.y - ybar) * (p.y - ybar);
  }
  fit.n = pts.size();
  const double scale = std::max(1.0, ybar * ybar) * static_cast<double>(pts.size());
  if (sst <= 1e-24 * scale) {
    fit.r2 = sse <= 1e-20 * scale ? 1.0 : 0.0;
  } else {
    fit.r2 = std::clamp(1.0 - sse / sst, 0.0, 1.0);
  }
}

inline double median_inplace(std::vector<double>& v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Least-squares line through the points (centered sums). Theil–Sen takes the
/// median pairwise slope and the median residual intercept instead.
inline LinearFit fit_linear(std::span<const Point> pts, FitMethod method = FitMethod::ols) {
  if (pts.size() < 2) throw Error(ErrorCode::insufficient_data, "need at least 2 points");
  double xbar = 0.0, ybar = 0.0;
  for (const auto& p : pts) {
    xbar += p.x;
    ybar += p.y;
  }
  xbar /= static_cast<double>(pts.size());
  ybar /= static_cast<double>(pts.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : pts) {
    sxx += (p.x - xbar) * (p.x - xbar);
    sxy += (p.x - xbar) * (p.y - ybar);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::degenerate_input, "all x values are equal");

  LinearFit fit;
  if (method == FitMethod::ols) {
    fit.a = sxy / sxx;
    fit.b = ybar - fit.a * xbar;
  } else {
    std::vector<double> slopes;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        if (pts[j].x != pts[i].x) slopes.push_back((pts[j].y - pts[i].y) / (pts[j].x - pts[i].x));
      }
    }
    fit.a = detail::median_inplace(slopes);
    std::vector<double> intercepts;
    for (const auto& p : pts) intercepts.push_back(p.y - fit.a * p.x);
    fit.b = detail::median_inplace(intercepts);
  }
  detail::finish_fit(fit, pts);
  return fit;
}

inline LinearFit fit_linear(const std::vector<Point>& pts, FitMethod method = FitMethod::ols) {
  return fit_linear(std::span<const Point>(pts), method);
}

struct KneeFit {
  double knee_pixels = 0.0;
  double c_flat = 0.0;
  LinearFit below_fit;
  double sse = 0.0;
  std::size_t knee_index = 0;   // first point (sorted by pixels) in the flat segment
  std::size_t flat_count = 0;
  std::size_t below_count = 0;
  /// (below prediction at the knee - c_flat) / c_flat
  double continuity_gap = 0.0;
  bool confident = false;
  std::optional<double> hint_pixels;
  /// knee minus hint, in units of the local grid spacing of the data.
  std::optional<double> hint_discrepancy_steps;
};

/// Position of `v` on the sorted grid `xs` as a fractional index (linear
/// between neighbours, extrapolated with the end spacing).
inline double fractional_grid_index(const std::vector<double>& xs, double v) {
  if (xs.size() < 2) return 0.0;
  auto it = std::upper_bound(xs.begin(), xs.end(), v);
  std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  hi = std::clamp<std::size_t>(hi, 1, xs.size() - 1);
  const std::size_t lo = hi - 1;
  const double span = xs[hi] - xs[lo];
  if (span <= 0) return static_cast<double>(lo);
  return static_cast<double>(lo) + (v - xs[lo]) / span;
}

/// Exhaustive flat-then-drop changepoint search over (pixels, cost) points:
/// each split scores the SSE of an affine fit on the points below plus a
/// constant on the points at/above it; the minimum wins.
inline KneeFit detect_knee(std::vector<Point> pts, std::optional<double> hint_pixels = std::nullopt) {
  if (pts.size() < 4) throw Error(ErrorCode::insufficient_data, "knee search needs at least 4 points");
  std::sort(pts.begin(), pts.end(), [](const Point& l, const Point& r) { return l.x < r.x; });
  const std::size_t n = pts.size();

  double ybar = 0.0;
  for (const auto& p : pts) ybar += p.y;
  ybar /= static_cast<double>(n);
  double sst = 0.0;
  for (const auto& p : pts) sst += (p.y - ybar) * (p.y - ybar);
  const double tie_tol = 1e-12 * (sst + ybar * ybar + 1.0);

  double best_sse = std::numeric_limits<double>::infinity();
  std::size_t best_k = 0;
  LinearFit best_below;
  double best_flat = 0.0;
  for (std::size_t k = 2; k < n; ++k) {
    const std::span<const Point> below(pts.data(), k);
    if (below.front().x == below.back().x) continue;
    LinearFit fit = fit_linear(below);
    double sse = 0.0;
    for (double r : fit.residuals) sse += r * r;
    double flat = 0.0;
    for (std::size_t i = k; i < n; ++i) flat += pts[i].y;
    flat /= static_cast<double>(n - k);
    for (std::size_t i = k; i < n; ++i) sse += (pts[i].y - flat) * (pts[i].y - flat);
    // Ties go to the longest flat segment (first k reached).
    if (sse < best_sse - tie_tol) {
      best_sse = sse;
      best_k = k;
      best_below = std::move(fit);
      best_flat = flat;
    }
  }
  if (best_k == 0) throw Error(ErrorCode::degenerate_input, "no split with distinct pixel values below it");

  KneeFit out;
  out.sse = best_sse;
  out.knee_index = best_k;
  out.flat_count = n - best_k;
  out.below_count = best_k;
  out.c_flat = best_flat;
  out.below_fit = best_below;

  const double x_lo = pts[best_k - 1].x;
  const double x_hi = pts[best_k].x;
  out.knee_pixels = x_hi;
  if (best_below.a > 0) {
    const double cross = (best_flat - best_below.b) / best_below.a;
    if (cross >= x_lo && cross <= x_hi) out.knee_pixels = cross;
  }
  const double pred = best_below(out.knee_pixels);
  out.continuity_gap = best_flat != 0.0 ? (pred - best_flat) / std::abs(best_flat) : 0.0;
  out.confident = out.flat_count >= 2 && best_below.a > 0 && std::abs(out.continuity_gap) <= 0.10;

  if (hint_pixels) {
    std::vector<double> xs;
    xs.reserve(n);
    for (const auto& p : pts) {
      if (xs.empty() || p.x > xs.back()) xs.push_back(p.x);
    }
    out.hint_pixels = *hint_pixels;
    out.hint_discrepancy_steps =
        fractional_grid_index(xs, out.knee_pixels) - fractional_grid_index(xs, *hint_pixels);
  }
  return out;
}

inline KneeFit detect_knee(std::vector<Point> pts, ClampSpec hint) {
  return detect_knee(std::move(pts), static_cast<double>(effective_pixels(hint)));
}

/// One row per sweep point for fitting the clamp compute model.
struct ClampObservation {
  Resolution nominal;
  double auc = 0.0;
  std::optional<double> tps;
};

/// Fits C̃ affine in effective pixels over all observations (points beyond the
/// clamp all share the clamped size, so they pin the flat level). A negative
/// slope is replaced by a constant model so C̃ stays nondecreasing.
inline ClampComputeModel fit_clamp_model(const std::vector<ClampObservation>& obs, ClampSpec clamp) {
  std::vector<Point> pts;
  std::vector<Point> spt;
  for (const auto& o : obs) {
    const double px = static_cast<double>(effective_pixels(apply_clamp(o.nominal, clamp)));
    pts.push_back({px, o.auc});
    if (o.tps && *o.tps > 0) spt.push_back({px, 1.0 / *o.tps});
  }
  ClampComputeModel m;
  LinearFit fit = fit_linear(pts);
  if (fit.a < 0) {
    double mean = 0.0;
    for (const auto& p : pts) mean += p.y;
    fit.a = 0.0;
    fit.b = mean / static_cast<double>(pts.size());
  }
  m.k0 = fit.b;
  m.k1 = fit.a;
  m.fitted = true;

  double flat_sum = 0.0;
  std::size_t flat_n = 0;
  for (const auto& o : obs) {
    if (dominates_clamp(o.nominal, clamp)) {
      flat_sum += m.compute_at(effective_pixels(apply_clamp(o.nominal, clamp)));
      ++flat_n;
    }
  }
  m.c_flat = flat_n ? flat_sum / static_cast<double>(flat_n) : m.compute_at(effective_pixels(clamp));

  if (spt.size() >= 2 && spt.front().x != spt.back().x) {
    bool distinct = false;
    for (const auto& p : spt) distinct |= p.x != spt.front().x;
    if (distinct) {
      const LinearFit t = fit_linear(spt);
      m.m0 = t.b;
      m.m1 = t.a;
    }
  }
  return m;
}

/// Per-input cost figures of one run, keyed for matching across runs.
struct InputMetrics {
  double key = 0.0;
  double cpu_auc = 0.0;
  double ram_auc = 0.0;
  std::optional<double> wh;
  double tps = 0.0;
  std::optional<double> accuracy;   // in [0, 1]
  bool degenerate = false;
};

struct RunMetrics {
  std::string model;
  std::string device;
  std::vector<InputMetrics> inputs;
};

struct InputComparison {
  double key = 0.0;
  std::optional<double> cpu_reduction_pct;
  std::optional<double> ram_reduction_pct;
  std::optional<double> wh_reduction_pct;
  std::optional<double> speedup;
  bool comp_faster = false;
};

struct ComparisonReport {
  std::string base_model;
  std::string comp_model;
  std::string device;
  std::vector<InputComparison> per_input;
  std::optional<double> mean_cpu_reduction_pct;
  std::optional<double> mean_ram_reduction_pct;
  std::optional<double> mean_wh_reduction_pct;
  std::optional<double> speedup;
  int wins = 0;
  std::optional<double> accuracy_delta_pp;
  std::vector<double> accuracy_removed_keys;
  std::size_t matched = 0;
  std::size_t unmatched = 0;
};

/// (base - comp) / base · 100; undefined when base is not positive.
inline std::optional<double> reduction_pct(double base, double comp) {
  if (!(base > 0)) return std::nullopt;
  return (base - comp) / base * 100.0;
}

inline ComparisonReport compare_models(const RunMetrics& base, const RunMetrics& comp) {
  std::map<double, const InputMetrics*> comp_by_key;
  for (const auto& m : comp.inputs) comp_by_key[m.key] = &m;

  ComparisonReport rep;
  rep.base_model = base.model;
  rep.comp_model = comp.model;
  rep.device = base.device == comp.device ? base.device : base.device + " / " + comp.device;

  auto mean_of = [](const std::vector<double>& v) -> std::optional<double> {
    if (v.empty()) return std::nullopt;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  std::vector<double> cpu, ram, wh, speed, acc_base, acc_comp;
  for (const auto& b : base.inputs) {
    auto it = comp_by_key.find(b.key);
    if (it == comp_by_key.end()) {
      ++rep.unmatched;
      continue;
    }
    const InputMetrics& c = *it->second;
    ++rep.matched;
    InputComparison row;
    row.key = b.key;
    row.cpu_reduction_pct = reduction_pct(b.cpu_auc, c.cpu_auc);
    row.ram_reduction_pct = reduction_pct(b.ram_auc, c.ram_auc);
    if (b.wh && c.wh) row.wh_reduction_pct = reduction_pct(*b.wh, *c.wh);
    if (b.tps > 0) row.speedup = c.tps / b.tps;
    row.comp_faster = c.tps > b.tps;
    if (row.cpu_reduction_pct) cpu.push_back(*row.cpu_reduction_pct);
    if (row.ram_reduction_pct) ram.push_back(*row.ram_reduction_pct);
    if (row.wh_reduction_pct) wh.push_back(*row.wh_reduction_pct);
    if (row.speedup) speed.push_back(*row.speedup);
    if (row.comp_faster) ++rep.wins;
    if (b.accuracy && c.accuracy) {
      if (b.degenerate || c.degenerate) {
        rep.accuracy_removed_keys.push_back(b.key);
      } else {
        acc_base.push_back(*b.accuracy);
        acc_comp.push_back(*c.accuracy);
      }
    }
    rep.per_input.push_back(row);
  }
  rep.unmatched += comp.inputs.size() - rep.matched;
  if (rep.matched == 0) throw Error(ErrorCode::mismatch, "runs share no input keys");

  rep.mean_cpu_reduction_pct = mean_of(cpu);
  rep.mean_ram_reduction_pct = mean_of(ram);
  rep.mean_wh_reduction_pct = mean_of(wh);
  rep.speedup = mean_of(speed);
  if (!acc_base.empty()) {
    rep.accuracy_delta_pp = (*mean_of(acc_comp) - *mean_of(acc_base)) * 100.0;
  }
  return rep;
}

}  // namespace cpulab
