// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#include <clocale>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cpulab/trace_io.hpp"
#include "test_support.hpp"

namespace cpulab {
namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::state;
}

TEST(ResourceTraceIo, RoundTripKeepsHeaderAndSamples) {
  ResourceTrace tr;
  tr.run_id = "run-1";
  tr.device = "laptop a";
  tr.nominal_rate_hz = 5.0;
  tr.samples = {{0.0, 3.5, 812.25}, {0.2, 97.125, 900.0}, {0.4, 0.0, 901.5}};
  std::stringstream ss;
  write_resource_trace(ss, tr);
  EXPECT_TRUE(ss.str().starts_with("#cpulab-resource\t"));
  const auto back = read_resource_trace(ss);
  EXPECT_EQ(back.run_id, "run-1");
  EXPECT_EQ(back.nominal_rate_hz, 5.0);
  ASSERT_EQ(back.samples.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(back.samples[i].t, tr.samples[i].t, 1e-6);
    EXPECT_NEAR(back.samples[i].cpu_pct, tr.samples[i].cpu_pct, 1e-6);
    EXPECT_NEAR(back.samples[i].ram_mb, tr.samples[i].ram_mb, 1e-6);
  }
}

TEST(ResourceTraceIo, FileRoundTripAndMissingFile) {
  testing::TempDir dir("io");
  const auto tr = testing::sample_function([](double t) { return 10.0 + t; }, 0.0, 2.0, 5.0);
  save_resource_trace(dir / "trace.txt", tr);
  EXPECT_EQ(load_resource_trace(dir / "trace.txt").samples.size(), tr.samples.size());
  EXPECT_EQ(code_of([&] { load_resource_trace(dir / "absent.txt"); }), ErrorCode::io);
}

TEST(ResourceTraceIo, MalformedLinesAreInputErrors) {
  std::istringstream two("0.0 5.0\n");
  EXPECT_EQ(code_of([&] { read_resource_trace(two); }), ErrorCode::input);
  std::istringstream word("0.0 five 100\n");
  EXPECT_EQ(code_of([&] { read_resource_trace(word); }), ErrorCode::input);
}

TEST(ResourceTraceIo, IgnoresLocaleDecimalComma) {
  const char* prev = std::setlocale(LC_ALL, nullptr);
  const std::string saved = prev ? prev : "C";
  std::setlocale(LC_ALL, "de_DE.UTF-8");
  EXPECT_EQ(format_double(1.5, 2), "1.50");
  EXPECT_DOUBLE_EQ(parse_double("2.25"), 2.25);
  std::setlocale(LC_ALL, saved.c_str());
}

TEST(MeterLog, ParsesWhitespaceAndCommaLines) {
  EXPECT_FALSE(parse_meter_line("").has_value());
  EXPECT_FALSE(parse_meter_line("# header").has_value());
  const auto a = parse_meter_line("12.5 43.0");
  ASSERT_TRUE(a);
  EXPECT_DOUBLE_EQ(a->t, 12.5);
  EXPECT_DOUBLE_EQ(a->watts, 43.0);
  const auto b = parse_meter_line("  3,13.6 ");
  ASSERT_TRUE(b);
  EXPECT_DOUBLE_EQ(b->watts, 13.6);
  EXPECT_EQ(code_of([] { parse_meter_line("1 2 3"); }), ErrorCode::input);
  EXPECT_EQ(code_of([] { parse_meter_line("1 -4"); }), ErrorCode::input);
}

TEST(EnergyTraceIo, RoundTripAndBareLog) {
  EnergyTrace e;
  e.run_id = "r";
  e.device = "bench";
  e.nominal_rate_hz = 1.0;
  for (int t = 0; t < 5; ++t) e.samples.push_back({double(t), 40.0 + t});
  std::stringstream ss;
  write_energy_trace(ss, e);
  const auto back = read_energy_trace(ss);
  EXPECT_EQ(back.device, "bench");
  ASSERT_EQ(back.samples.size(), 5u);
  EXPECT_DOUBLE_EQ(back.samples[4].watts, 44.0);

  std::istringstream bare("# meter export\n0 43\n1 43\n\n2 43\n");
  EXPECT_EQ(read_energy_trace(bare).samples.size(), 3u);
}

TEST(WindowsCsv, RoundTrip) {
  testing::TempDir dir("io");
  const std::vector<InferenceWindow> w = {{1.0, 2.5, "p01"}, {4.25, 9.0, "p02"}};
  save_windows_csv(dir / "windows.csv", w);
  const auto back = load_windows_csv(dir / "windows.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].prompt_id, "p02");
  EXPECT_DOUBLE_EQ(back[1].start_t, 4.25);
  EXPECT_DOUBLE_EQ(back[0].end_t, 2.5);

  std::ofstream(dir / "bad.csv") << "prompt_id,start_t,end_t\np01,1.0\n";
  EXPECT_EQ(code_of([&] { load_windows_csv(dir / "bad.csv"); }), ErrorCode::input);
}

}  // namespace
}  // namespace cpulab
