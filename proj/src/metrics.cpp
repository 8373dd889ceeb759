#include "cdepth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cdepth/errors.hpp"

namespace cdepth {

namespace {

void check_pair(std::size_t a, std::size_t b) {
  if (a != b) throw LengthMismatch(a, b);
  if (a == 0) throw EmptyInput("metric over an empty prediction vector");
}

void check_series(const LayerAccuracySeries& series) {
  if (series.d() < 2) throw ValidationError("a layer series needs at least 2 layers");
  for (std::size_t i = 0; i < series.d(); ++i) {
    const double a = series.alpha[i];
    if (!std::isfinite(a) || a > 1.0) {
      throw ValidationError("accuracy at layer " + std::to_string(i) + " outside [0, 1]");
    }
    if (!(a > 0.0)) throw ZeroAccuracy(i);
  }
}

}  // namespace

double accuracy(std::span<const std::uint8_t> z, std::span<const std::uint8_t> y) {
  check_pair(z.size(), y.size());
  std::size_t hits = 0;
  for (std::size_t k = 0; k < z.size(); ++k) hits += (z[k] == y[k]);
  return static_cast<double>(hits) / static_cast<double>(z.size());
}

double f1_score(std::span<const std::uint8_t> z, std::span<const std::uint8_t> y) {
  check_pair(z.size(), y.size());
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (z[k] && y[k]) ++tp;
    else if (z[k] && !y[k]) ++fp;
    else if (!z[k] && y[k]) ++fn;
  }
  const std::size_t denom = 2 * tp + fp + fn;
  if (denom == 0) return 0.0;
  return static_cast<double>(2 * tp) / static_cast<double>(denom);
}

double auc(std::span<const double> scores, std::span<const std::uint8_t> y) {
  if (scores.size() != y.size()) throw LengthMismatch(scores.size(), y.size());
  const std::size_t n = scores.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (std::isnan(scores[k])) throw NonFiniteValue(k, "auc scores");
  }
  std::size_t positives = 0;
  for (auto v : y) positives += (v != 0);
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw SingleClass();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the positive rank sum keeps midranks integral: a tie group spanning
  // sorted positions [lo, hi) has midrank (lo + hi + 1) / 2 in 1-based ranks.
  std::uint64_t rank_sum_x2 = 0;
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo + 1;
    while (hi < n && scores[order[hi]] == scores[order[lo]]) ++hi;
    std::size_t pos_in_group = 0;
    for (std::size_t k = lo; k < hi; ++k) pos_in_group += (y[order[k]] != 0);
    rank_sum_x2 += pos_in_group * (lo + hi + 1);
    lo = hi;
  }
  // U = R_pos - P(P+1)/2 counts (pos > neg) pairs plus half the ties.
  const std::uint64_t u_x2 = rank_sum_x2 - positives * (positives + 1);
  return static_cast<double>(u_x2) / (2.0 * static_cast<double>(positives) *
                                      static_cast<double>(negatives));
}

std::vector<double> variation_rate(const LayerAccuracySeries& series) {
  check_series(series);
  std::vector<double> beta(series.d() - 1);
  for (std::size_t i = 1; i < series.d(); ++i) beta[i - 1] = series.alpha[i] / series.alpha[i - 1];
  return beta;
}

std::optional<LayerFraction> jumping_point(const LayerAccuracySeries& series) {
  const auto beta = variation_rate(series);
  for (std::size_t i = 1; i < series.d(); ++i) {
    if (beta[i - 1] >= kJumpThreshold) return LayerFraction{i, series.d()};
  }
  return std::nullopt;
}

std::optional<LayerFraction> converging_point(const LayerAccuracySeries& series) {
  const auto beta = variation_rate(series);
  for (std::size_t i = series.d() - 1; i >= 1; --i) {
    if (std::abs(beta[i - 1] - 1.0) < kConvergeTolerance) return LayerFraction{i, series.d()};
  }
  return std::nullopt;
}

DepthMetrics depth_metrics(const LayerAccuracySeries& series) {
  DepthMetrics out;
  out.beta = variation_rate(series);
  out.jumping_point = jumping_point(series);
  out.converging_point = converging_point(series);
  const auto peak = std::max_element(series.alpha.begin(), series.alpha.end());  // first max
  out.peak_acc = *peak;
  out.peak_layer = static_cast<std::size_t>(peak - series.alpha.begin());
  out.comprehended = out.peak_acc >= kComprehensionThreshold;
  return out;
}

}  // namespace cdepth
