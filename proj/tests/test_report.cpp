// Copyright 2026 The cpulab Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cpulab/report.hpp"
#include "test_support.hpp"

namespace cpulab {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EnergyMetrics constant_power(double watts, double seconds) {
  return {watts * seconds / 3600.0, watts * seconds / 3600.0, watts, watts, seconds};
}

RunArtifacts ladder_run(const std::string& model, const fs::path& dir, double cpu_per_token, double tps,
                        bool with_energy) {
  RunArtifacts run;
  run.dir = dir;
  run.meta.run_id = model + "-run";
  run.meta.model_label = model;
  run.meta.device = "bench";
  run.meta.sweep_kind = "ladder";
  for (std::size_t i = 0; i < 6; ++i) {
    StepRecord r;
    r.index = i;
    r.input_key = "P" + std::to_string(i + 1);
    r.tokens_in = 50 * static_cast<std::int64_t>(i + 1);
    r.tokens_out = 16;
    AucMetrics a;
    a.cpu_auc = 20.0 + cpu_per_token * static_cast<double>(r.tokens_in);
    a.ram_auc = 100.0;
    a.duration_s = 13.0;
    a.tokens_in = r.tokens_in;
    a.tokens_out = 16;
    a.throughput_tps = tps;
    r.auc = a;
    r.window = InferenceWindow{10.0 * i, 10.0 * i + 13.0, r.input_key};
    if (with_energy) r.energy = constant_power(43.0, 13.0);
    run.records.push_back(r);
  }
  run.records[5].flagged = true;
  run.records[5].flag_reason = "window spans several steps";
  return run;
}

TEST(EnergyRow, ConstantPowerFigures) {
  const std::vector<double> d(19, 13.0);
  const std::vector<EnergyMetrics> e(19, constant_power(43.0, 13.0));
  const auto row = make_energy_row("m", "rpi5", d, e);
  EXPECT_EQ(row.prompts, 19u);
  EXPECT_NEAR(*row.wh_per_prompt, 43.0 * 13.0 / 3600.0, 1e-12);
  EXPECT_NEAR(*row.wh_per_prompt, 0.16, 0.005);
  EXPECT_NEAR(*row.wh_per_run, 19.0 * 43.0 * 13.0 / 3600.0, 1e-12);
  EXPECT_NEAR(*row.wh_per_run, 2.95, 0.005);
  EXPECT_DOUBLE_EQ(*row.max_power_w, 43.0);

  const auto m2 = make_energy_row("m", "m2", {34.8}, {constant_power(13.6, 34.8)});
  EXPECT_NEAR(*m2.wh_per_prompt, 0.13, 0.005);
}

TEST(EnergyRow, UsesMaxPowerTimesMeanDuration) {
  const auto row = make_energy_row("m", "d", {10.0, 20.0}, {constant_power(30.0, 10.0), constant_power(50.0, 20.0)});
  EXPECT_NEAR(*row.wh_per_prompt, 50.0 * 15.0 / 3600.0, 1e-12);
  EXPECT_NEAR(*row.wh_per_prompt_max_duration, 50.0 * 20.0 / 3600.0, 1e-12);
  EXPECT_DOUBLE_EQ(row.max_duration_s, 20.0);
}

TEST(EnergyRow, NoMeterLeavesEnergyEmpty) {
  const auto row = make_energy_row("m", "d", {1.0, 2.0}, {});
  EXPECT_FALSE(row.wh_per_prompt);
  EXPECT_DOUBLE_EQ(row.mean_duration_s, 1.5);
  try {
    make_energy_row("m", "d", {1.0, 2.0}, {constant_power(1, 1)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::mismatch);
  }
}

TEST(FitRun, LadderUsesTokens) {
  testing::TempDir dir("rep");
  const auto f = fit_run(ladder_run("base", dir.path(), 0.059, 5.0, false));
  EXPECT_EQ(f.x, "tokens");
  ASSERT_TRUE(f.fit);
  EXPECT_NEAR(f.fit->a, 0.059, 1e-9);
  EXPECT_NEAR(f.fit->b, 20.0, 1e-7);
}

TEST(EmitSummary, SingleRun) {
  testing::TempDir dir("rep");
  const auto out = emit_summary({ladder_run("base", dir / "run", 0.05, 5.0, true)}, {}, dir / "report");
  for (const char* f : {"energy_table.csv", "fits.json", "summary.md", "fig_auc_vs_tokens.svg", "fig_auc_vs_pixels.svg",
                        "fig_tps_vs_pixels.svg", "fig_accuracy_vs_pixels.svg"}) {
    EXPECT_TRUE(fs::exists(dir / "report" / f)) << f;
  }
  std::ifstream csv(dir / "report" / "energy_table.csv");
  std::size_t lines = 0;
  for (std::string l; std::getline(csv, l);) lines += !l.empty();
  EXPECT_EQ(lines, 2u);
  EXPECT_NE(slurp(dir / "report" / "summary.md").find("window spans several steps"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "report" / "provenance.txt"));
  EXPECT_FALSE(out.files.empty());
}

TEST(EmitSummary, DeterministicAndTraceable) {
  testing::TempDir dir("rep");
  const std::vector<RunArtifacts> runs = {ladder_run("base", dir / "a", 0.06, 4.0, true),
                                          ladder_run("comp", dir / "b", 0.03, 8.0, true)};
  RunMetrics ma{"base", "bench", {}}, mb{"comp", "bench", {}};
  for (const auto& r : runs[0].records) ma.inputs.push_back({double(r.tokens_in), r.auc->cpu_auc, 100.0, 0.1, 4.0, {}, false});
  for (const auto& r : runs[1].records) mb.inputs.push_back({double(r.tokens_in), r.auc->cpu_auc, 90.0, 0.05, 8.0, {}, false});
  const auto cmp = compare_models(ma, mb);

  const auto first = emit_summary(runs, {cmp}, dir / "r1", true);
  emit_summary(runs, {cmp}, dir / "r2", true);
  for (const auto& f : first.files) {
    const auto name = f.filename();
    EXPECT_EQ(slurp(dir / "r1" / name), slurp(dir / "r2" / name)) << name;
  }
  EXPECT_TRUE(fs::exists(dir / "r1" / "comparisons.csv"));
  EXPECT_TRUE(fs::exists(dir / "r1" / "provenance.txt"));
  EXPECT_FALSE(first.provenance.empty());
  const std::string prov = slurp(dir / "r1" / "provenance.txt");
  EXPECT_NE(prov.find("energy_table.csv"), std::string::npos);
  EXPECT_NE(prov.find("records.json"), std::string::npos);
  const std::string svg = slurp(dir / "r1" / "fig_auc_vs_tokens.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("series=\"base"), std::string::npos);
}

TEST(EmitSummary, NoRunsIsInputError) {
  testing::TempDir dir("rep");
  try {
    emit_summary({}, {}, dir / "r");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::input);
  }
}

}  // namespace
}  // namespace cpulab
