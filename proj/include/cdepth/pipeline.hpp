#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cdepth/metrics.hpp"
#include "cdepth/probe.hpp"
#include "cdepth/reps_io.hpp"
#include "json.hpp"

namespace cdepth {

enum class ReportFormat { Json, Csv, Markdown };

ReportFormat parse_report_format(std::string_view name);

struct PipelineConfig {
  ProbeConfig probe;
  std::size_t parallelism = 1;
  // Resplit per layer with seed split_seed + layer instead of sharing one split.
  bool per_layer_split = false;

  void validate() const;
};

std::size_t default_parallelism();

struct ProbeDiagnostics {
  bool converged = false;
  std::size_t iters_used = 0;
  double final_grad_norm = 0.0;
  double final_objective = 0.0;
};

/// One of the six reference depths: first, 25%, 50%, 67%, 83%, last.
struct SummaryRow {
  std::string label;
  double fraction = 0.0;
  std::size_t layer_index = 0;
  LayerEval eval;
};

inline constexpr std::array<double, 6> kSummaryFractions = {0.0, 0.25, 0.5, 0.67, 0.83, 1.0};

/// round(fraction * (d - 1)) for each reference fraction.
std::array<std::size_t, 6> summary_layers(std::size_t d);

struct RunReport {
  RunManifest manifest;
  PipelineConfig config;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::vector<LayerEval> layers;
  std::vector<ProbeDiagnostics> diagnostics;
  DepthMetrics depth;
  std::vector<SummaryRow> summary;
};

/// Fits one probe per layer and evaluates it on the held-out split. Results
/// do not depend on config.parallelism. The first failing layer (by index) is
/// reported as PartialFailure.
RunReport run_pipeline(const Run& run, const PipelineConfig& config,
                       std::vector<ProbeModel>* probes_out = nullptr);
RunReport run_pipeline(const std::filesystem::path& run_dir, const PipelineConfig& config,
                       std::vector<ProbeModel>* probes_out = nullptr);

nlohmann::json depth_to_json(const DepthMetrics& depth);
nlohmann::json report_to_json(const RunReport& report);

std::string render_report(const RunReport& report, ReportFormat format);
void emit_report(const RunReport& report, ReportFormat format, const std::filesystem::path& path);

}  // namespace cdepth
