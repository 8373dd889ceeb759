#pragma once

// Per-layer classification metrics and the depth metrics over a layer series.
//
// For accuracies a_0..a_{d-1}:
//   variation rate   b_i = a_i / a_{i-1},                    i = 1..d-1
//   jumping point    min i/d such that b_i >= 1.1
//   converging point max i/d such that |b_i - 1| < 0.03
//   peak             max a_i (earliest layer on ties); comprehended iff peak >= 0.7

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace cdepth {

inline constexpr double kJumpThreshold = 1.1;
inline constexpr double kConvergeTolerance = 0.03;
inline constexpr double kComprehensionThreshold = 0.7;

struct LayerEval {
  std::size_t layer_index = 0;
  double acc = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
};

struct LayerAccuracySeries {
  std::vector<double> alpha;

  std::size_t d() const { return alpha.size(); }
};

/// A layer position reported as index/d. Index is 1..d-1, so the value never
/// reaches 1.0.
struct LayerFraction {
  std::size_t index = 0;
  std::size_t layers = 0;

  double value() const { return static_cast<double>(index) / static_cast<double>(layers); }
  bool operator==(const LayerFraction&) const = default;
};

struct DepthMetrics {
  std::vector<double> beta;
  std::optional<LayerFraction> jumping_point;
  std::optional<LayerFraction> converging_point;
  double peak_acc = 0.0;
  std::size_t peak_layer = 0;
  bool comprehended = false;
};

double accuracy(std::span<const std::uint8_t> z, std::span<const std::uint8_t> y);
/// Binary F1 for class 1: 2TP / (2TP + FP + FN), or 0 when the denominator is 0.
double f1_score(std::span<const std::uint8_t> z, std::span<const std::uint8_t> y);
/// ROC-AUC via the Mann-Whitney statistic with midranks for tied scores.
double auc(std::span<const double> scores, std::span<const std::uint8_t> y);

std::vector<double> variation_rate(const LayerAccuracySeries& series);
std::optional<LayerFraction> jumping_point(const LayerAccuracySeries& series);
std::optional<LayerFraction> converging_point(const LayerAccuracySeries& series);
DepthMetrics depth_metrics(const LayerAccuracySeries& series);

}  // namespace cdepth
