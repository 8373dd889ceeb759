#pragma once

// L2-regularized binary logistic-regression probe.
//
//   J(theta, b) = -(1/n) sum_i [ y_i log s(t_i) + (1 - y_i) log(1 - s(t_i)) ]
//                 + lambda/(2n) * sum_j theta_j^2,        t_i = theta . x_i + b
//
// The intercept b is not penalized. Training is full-batch gradient descent
// with Armijo backtracking, started from zero, on standardized features.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cdepth/reps_io.hpp"
#include "json.hpp"

namespace cdepth {

struct ProbeConfig {
  double lambda = 1.0;
  std::size_t max_iters = 10000;
  double grad_tol = 1e-6;
  bool standardize = true;
  std::uint64_t split_seed = 42;
  double train_fraction = 0.8;

  // Throws ValidationError.
  void validate() const;
};

/// Dense row-major matrix of doubles; the probe's working representation.
struct DesignMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  DesignMatrix() = default;
  DesignMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}
  DesignMatrix(std::size_t r, std::size_t c, std::vector<double> v);

  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

DesignMatrix to_design(const RepresentationMatrix& m);
DesignMatrix select_rows(const RepresentationMatrix& m, std::span<const std::size_t> rows);
std::vector<std::uint8_t> select_labels(const LabelVector& y, std::span<const std::size_t> rows);

struct SplitIndex {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

struct ProbeModel {
  std::vector<double> theta;
  double intercept = 0.0;
  double lambda = 0.0;
  std::vector<double> feature_means;
  std::vector<double> feature_stds;
  bool converged = false;
  std::size_t iters_used = 0;
  double final_grad_norm = 0.0;
  double final_objective = 0.0;

  bool operator==(const ProbeModel&) const = default;
};

struct PredictionVector {
  std::vector<std::uint8_t> z;
  std::vector<double> scores;
};

struct Gradient {
  std::vector<double> theta;
  double intercept = 0.0;
};

double sigmoid(double t);

double objective(std::span<const double> theta, double intercept, const DesignMatrix& x,
                 std::span<const std::uint8_t> y, double lambda);

Gradient gradient(std::span<const double> theta, double intercept, const DesignMatrix& x,
                  std::span<const std::uint8_t> y, double lambda);

/// Seeded Fisher-Yates permutation of 0..n-1; the first round(train_fraction*n)
/// entries (clamped to [1, n-1]) form the training set.
SplitIndex split(std::size_t n, const ProbeConfig& config);

/// Trains on raw features. When `objective_trace` is non-null it receives J
/// at the starting point and after every accepted step (standardized space).
ProbeModel fit(const DesignMatrix& x_train, std::span<const std::uint8_t> y_train,
               const ProbeConfig& config, std::vector<double>* objective_trace = nullptr);

PredictionVector predict(const ProbeModel& model, const DesignMatrix& x);

nlohmann::json probe_to_json(const ProbeModel& model);
ProbeModel probe_from_json(const nlohmann::json& j);

}  // namespace cdepth
