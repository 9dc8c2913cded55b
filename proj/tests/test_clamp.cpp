// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <gtest/gtest.h>

#include "cpulab/clamp.hpp"

namespace cpulab {
namespace {

constexpr ClampSpec kDefault{1024, 720};

ClampComputeModel linear_model(double k0, double k1) {
  ClampComputeModel m;
  m.fitted = true;
  m.k0 = k0;
  m.k1 = k1;
  m.c_flat = m.compute_at(effective_pixels(kDefault));
  return m;
}

TEST(ApplyClamp, Examples) {
  EXPECT_EQ(apply_clamp({640, 480}, kDefault), (Resolution{640, 480}));
  EXPECT_EQ(apply_clamp({1920, 1080}, kDefault), (Resolution{1024, 576}));
  EXPECT_EQ(apply_clamp({1024, 720}, {714, 496}), (Resolution{705, 496}));
  EXPECT_EQ(apply_clamp({1024, 720}, kDefault), (Resolution{1024, 720}));
}

TEST(ApplyClamp, ClampPixelCounts) {
  EXPECT_EQ(effective_pixels(ClampSpec{1024, 720}), 737280);
  EXPECT_EQ(effective_pixels(ClampSpec{854, 594}), 507276);
  EXPECT_EQ(effective_pixels(ClampSpec{714, 496}), 354144);
}

TEST(ApplyClamp, MatchesScaleFormula) {
  std::mt19937 rng(21);
  std::uniform_int_distribution<int> dim(1, 5000), cdim(16, 2048);
  for (int i = 0; i < 2000; ++i) {
    const Resolution r{dim(rng), dim(rng)};
    const ClampSpec c{cdim(rng), cdim(rng)};
    const double s = std::min({1.0, double(c.max_w) / r.width, double(c.max_h) / r.height});
    const auto u = apply_clamp(r, c);
    EXPECT_LE(std::abs(u.width - std::floor(s * r.width)), 1) << to_string(r) << " " << to_string(c);
    EXPECT_LE(std::abs(u.height - std::floor(s * r.height)), 1) << to_string(r) << " " << to_string(c);
    EXPECT_LE(u.width, c.max_w);
    EXPECT_LE(u.height, c.max_h);
    EXPECT_GE(u.width, 1);
    EXPECT_GE(u.height, 1);
  }
}

TEST(ApplyClamp, IdempotentAndIdentityBelow) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> dim(1, 4000), cdim(8, 2048);
  for (int i = 0; i < 2000; ++i) {
    const Resolution r{dim(rng), dim(rng)};
    const ClampSpec c{cdim(rng), cdim(rng)};
    const auto u = apply_clamp(r, c);
    EXPECT_EQ(apply_clamp(u, c), u);
    if (r.width <= c.max_w && r.height <= c.max_h) {
      EXPECT_EQ(u, r);
    }
  }
}

TEST(ApplyClamp, MonotoneAlongSameAspect) {
  std::mt19937 rng(8);
  std::uniform_int_distribution<int> base(1, 64), k(1, 60), cdim(16, 2048);
  for (int i = 0; i < 2000; ++i) {
    const int a = base(rng), b = base(rng);
    int k1 = k(rng), k2 = k(rng);
    if (k1 > k2) std::swap(k1, k2);
    const ClampSpec c{cdim(rng), cdim(rng)};
    EXPECT_LE(effective_pixels(apply_clamp({k1 * a, k1 * b}, c)), effective_pixels(apply_clamp({k2 * a, k2 * b}, c)));
  }
}

// Componentwise order does not imply pixel order once aspect ratios differ:
// the wider image is scaled by its width and loses rows.
TEST(ApplyClamp, ComponentwiseOrderIsNotPixelOrder) {
  const auto small = apply_clamp({1024, 720}, kDefault);
  const auto large = apply_clamp({1920, 1080}, kDefault);
  EXPECT_EQ(effective_pixels(small), 737280);
  EXPECT_EQ(effective_pixels(large), 589824);
}

TEST(PredictCompute, LinearBelowClamp) {
  EXPECT_DOUBLE_EQ(predict_compute({100, 100}, kDefault, linear_model(100.0, 1e-3)), 110.0);
}

TEST(PredictCompute, FlatAboveClamp) {
  const auto m = linear_model(100.0, 1e-3);
  const double at = predict_compute({1024, 720}, kDefault, m);
  EXPECT_DOUBLE_EQ(predict_compute({2048, 1440}, kDefault, m), at);
  EXPECT_DOUBLE_EQ(predict_compute({4096, 2880}, kDefault, m), at);
  EXPECT_DOUBLE_EQ(at, m.c_flat);
}

TEST(PredictCompute, SmallerClampNeverPredictsMore) {
  const auto m = linear_model(50.0, 2e-4);
  const ClampSpec a{714, 496}, b{1024, 720};
  std::mt19937 rng(2);
  std::uniform_int_distribution<int> dim(1, 3000);
  for (int i = 0; i < 1000; ++i) {
    const Resolution r{dim(rng), dim(rng)};
    const double pa = predict_compute(r, a, m), pb = predict_compute(r, b, m);
    EXPECT_LE(pa, pb);
    if (r.width <= a.max_w && r.height <= a.max_h) {
      EXPECT_DOUBLE_EQ(pa, pb);
    }
  }
}

TEST(PredictCompute, UnfittedIsStateError) {
  try {
    predict_compute({10, 10}, kDefault, ClampComputeModel{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::state);
  }
}

TEST(PredictThroughput, AffineSecondsPerToken) {
  auto m = linear_model(0.0, 0.0);
  m.m0 = 0.05;
  m.m1 = 1e-7;
  EXPECT_NEAR(predict_throughput({1000, 500}, kDefault, m), 1.0 / 0.1, 1e-9);
  EXPECT_DOUBLE_EQ(predict_throughput({4096, 2880}, kDefault, m), predict_throughput({2048, 1440}, kDefault, m));
  m.m0.reset();
  EXPECT_THROW(predict_throughput({10, 10}, kDefault, m), Error);
}

TEST(ParseResolution, AcceptsAndRejects) {
  EXPECT_EQ(parse_resolution("1024x720"), (Resolution{1024, 720}));
  EXPECT_EQ(parse_clamp("854X594"), (ClampSpec{854, 594}));
  EXPECT_FALSE(parse_resolution("1024"));
  EXPECT_FALSE(parse_resolution("0x5"));
  EXPECT_FALSE(parse_resolution("12ax5"));
  EXPECT_EQ(to_string(ClampSpec{714, 496}), "714x496");
}

}  // namespace
}  // namespace cpulab
