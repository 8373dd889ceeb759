#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <sstream>

#include "cdepth/canonical_json.hpp"
#include "cdepth/errors.hpp"
#include "cdepth/pipeline.hpp"
#include "cdepth/synth.hpp"
#include "oracles.hpp"

using namespace cdepth;
namespace fs = std::filesystem;

namespace {

cdepth::Run small_step_run(std::size_t d = 6, std::size_t step = 3) {
  auto p = step_profile(d, step, 4.0, 400, 8, 1.0);
  return generate_run(p);
}

std::size_t count_lines(const std::string& s, const std::string& prefix = {}) {
  std::istringstream in(s);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (prefix.empty() || line.rfind(prefix, 0) == 0) ++n;
  }
  return n;
}

}  // namespace

TEST(SummaryLayers, EighteenLayers) {
  const std::array<std::size_t, 6> expect = {0, 4, 9, 11, 14, 17};
  EXPECT_EQ(summary_layers(18), expect);
}

TEST(SummaryLayers, TwoLayers) {
  const std::array<std::size_t, 6> expect = {0, 0, 1, 1, 1, 1};
  EXPECT_EQ(summary_layers(2), expect);
}

TEST(Canonical, FloatsAndKeyOrder) {
  EXPECT_EQ(format_double17(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double17(1.0), "1.0");
  const nlohmann::json j = {{"b", 1}, {"a", {{"d", 0.5}, {"c", true}}}};
  EXPECT_EQ(canonical_dump(j), "{\n  \"a\": {\n    \"c\": true,\n    \"d\": 0.5\n  },\n  \"b\": 1\n}\n");
}

TEST(Pipeline, StepDetected) {
  const auto report = run_pipeline(small_step_run(), PipelineConfig{});
  ASSERT_EQ(report.layers.size(), 6u);
  // With 80 test rows, chance accuracy wobbles enough that b >= 1.1 can fire
  // between zero-signal layers, so the jump lands at or before the step.
  ASSERT_TRUE(report.depth.jumping_point.has_value());
  EXPECT_LE(report.depth.jumping_point->index, 3u);
  EXPECT_EQ(report.depth.jumping_point->layers, 6u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(report.layers[i].acc, 0.7) << "layer " << i;
  for (std::size_t i = 3; i < 6; ++i) EXPECT_GE(report.layers[i].acc, 0.9) << "layer " << i;
  EXPECT_TRUE(report.depth.comprehended);
  LayerAccuracySeries series;
  for (const auto& l : report.layers) series.alpha.push_back(l.acc);
  const auto recomputed = depth_metrics(series);
  EXPECT_EQ(report.depth.jumping_point, recomputed.jumping_point);
  EXPECT_EQ(report.depth.converging_point, recomputed.converging_point);
  EXPECT_EQ(report.depth.beta, recomputed.beta);
  EXPECT_EQ(report.n_train, 320u);
  EXPECT_EQ(report.n_test, 80u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(report.layers[i].layer_index, i);
}

TEST(Pipeline, ParallelismDoesNotChangeReport) {
  const cdepth::Run run = small_step_run(8, 4);
  PipelineConfig one;
  PipelineConfig many;
  many.parallelism = 8;
  const auto a = render_report(run_pipeline(run, one), ReportFormat::Json);
  const auto b = render_report(run_pipeline(run, many), ReportFormat::Json);
  EXPECT_EQ(a, b);
}

TEST(Pipeline, ProbesShareOneSplit) {
  const cdepth::Run run = small_step_run(4, 2);
  std::vector<ProbeModel> probes;
  run_pipeline(run, PipelineConfig{}, &probes);
  ASSERT_EQ(probes.size(), 4u);
  // Each layer's standardization means must come from the shared train rows.
  const auto s = split(run.labels.size(), ProbeConfig{});
  for (std::size_t layer = 0; layer < 4; ++layer) {
    const auto x = select_rows(run.layers[layer], s.train);
    for (std::size_t j = 0; j < x.cols; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < x.rows; ++i) mean += x(i, j);
      mean /= static_cast<double>(x.rows);
      EXPECT_NEAR(probes[layer].feature_means[j], mean, 1e-12);
    }
  }
}

TEST(Pipeline, PerLayerSplitChangesSeeds) {
  const cdepth::Run run = small_step_run(4, 2);
  PipelineConfig c;
  c.per_layer_split = true;
  const auto a = run_pipeline(run, c);
  const auto b = run_pipeline(run, PipelineConfig{});
  EXPECT_NE(render_report(a, ReportFormat::Json), render_report(b, ReportFormat::Json));
  // Layer 0 reuses the base seed.
  EXPECT_EQ(a.layers[0].acc, b.layers[0].acc);
}

TEST(Pipeline, SingleClassLabelsFail) {
  cdepth::Run run = small_step_run(3, 1);
  run.labels.labels.assign(run.labels.size(), 1);
  try {
    run_pipeline(run, PipelineConfig{});
    FAIL();
  } catch (const PartialFailure& e) {
    EXPECT_EQ(e.layer(), 0u);
    EXPECT_FALSE(e.io());
  }
}

TEST(Pipeline, ZeroParallelismRejected) {
  PipelineConfig c;
  c.parallelism = 0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Report, JsonReemitIsByteIdentical) {
  const auto text = render_report(run_pipeline(small_step_run(), PipelineConfig{}), ReportFormat::Json);
  EXPECT_EQ(canonical_dump(nlohmann::json::parse(text)), text);
  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j["layers"].size(), 6u);
  EXPECT_EQ(j["summary"].size(), 6u);
  EXPECT_TRUE(j.contains("config"));
  EXPECT_TRUE(j.contains("manifest"));
  const auto report = run_pipeline(small_step_run(), PipelineConfig{});
  EXPECT_EQ(j["depth"]["jumping_point"]["index"], report.depth.jumping_point->index);
}

TEST(Report, CsvRowCount) {
  const auto text = render_report(run_pipeline(small_step_run(), PipelineConfig{}), ReportFormat::Csv);
  EXPECT_EQ(text.rfind("layer,acc,f1,auc\n", 0), 0u);
  EXPECT_EQ(count_lines(text) - count_lines(text, "#"), 6u + 1u);
}

TEST(Report, MarkdownSixRows) {
  const auto text = render_report(run_pipeline(small_step_run(), PipelineConfig{}), ReportFormat::Markdown);
  EXPECT_EQ(count_lines(text, "| "), 7u);  // header + six rows
  EXPECT_EQ(count_lines(text, "|---"), 1u);
}

TEST(Report, FormatNames) {
  EXPECT_EQ(parse_report_format("json"), ReportFormat::Json);
  EXPECT_EQ(parse_report_format("csv"), ReportFormat::Csv);
  EXPECT_EQ(parse_report_format("md"), ReportFormat::Markdown);
  EXPECT_THROW(parse_report_format("xml"), ValidationError);
}

TEST(Report, EmitWritesFile) {
  const auto dir = oracle::fresh_temp_dir("emit");
  const auto report = run_pipeline(small_step_run(), PipelineConfig{});
  emit_report(report, ReportFormat::Json, dir / "r.json");
  std::ifstream in(dir / "r.json", std::ios::binary);
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  EXPECT_EQ(text, render_report(report, ReportFormat::Json));
  EXPECT_THROW(emit_report(report, ReportFormat::Json, dir / "missing" / "r.json"), IoError);
  fs::remove_all(dir);
}
