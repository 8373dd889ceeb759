#include "cdepth/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

#include "cdepth/errors.hpp"
#include "cdepth/rng.hpp"

namespace cdepth {

namespace {

constexpr double kArmijoC = 1e-4;
constexpr double kShrink = 0.5;
constexpr double kMinStep = 1e-20;

// log(1 + e^t) without overflow.
double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

void check_shapes(std::size_t theta_len, const DesignMatrix& x, std::span<const std::uint8_t> y) {
  if (x.cols != theta_len) {
    throw ShapeMismatch("theta has " + std::to_string(theta_len) + " entries but X has " +
                        std::to_string(x.cols) + " columns");
  }
  if (x.rows != y.size()) {
    throw ShapeMismatch("X has " + std::to_string(x.rows) + " rows but y has " +
                        std::to_string(y.size()) + " labels");
  }
  if (x.values.size() != x.rows * x.cols) throw ShapeMismatch("design matrix storage size");
}

void linear_scores(const DesignMatrix& x, std::span<const double> theta, double intercept,
                   std::vector<double>& out) {
  out.resize(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto r = x.row(i);
    double s = intercept;
    for (std::size_t j = 0; j < x.cols; ++j) s += theta[j] * r[j];
    out[i] = s;
  }
}

double penalty(std::span<const double> theta) {
  double sq = 0.0;
  for (double t : theta) sq += t * t;
  return sq;
}

double objective_from_scores(std::span<const double> scores, std::span<const std::uint8_t> y,
                             double theta_sq, double lambda) {
  const double n = static_cast<double>(scores.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    // -[y log s(t) + (1-y) log(1 - s(t))] = softplus(t) - y t
    loss += softplus(scores[i]) - (y[i] ? scores[i] : 0.0);
  }
  return loss / n + lambda / (2.0 * n) * theta_sq;
}

void gradient_from_scores(const DesignMatrix& x, std::span<const double> scores,
                          std::span<const std::uint8_t> y, std::span<const double> theta,
                          double lambda, Gradient& g) {
  const double n = static_cast<double>(x.rows);
  g.theta.assign(x.cols, 0.0);
  g.intercept = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double r = sigmoid(scores[i]) - (y[i] ? 1.0 : 0.0);
    g.intercept += r;
    const auto xi = x.row(i);
    for (std::size_t j = 0; j < x.cols; ++j) g.theta[j] += r * xi[j];
  }
  for (std::size_t j = 0; j < x.cols; ++j) g.theta[j] = g.theta[j] / n + lambda / n * theta[j];
  g.intercept /= n;
}

void check_binary(std::span<const std::uint8_t> y) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > 1) throw InvalidLabel(i, y[i]);
  }
}

}  // namespace

void ProbeConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be >= 0");
  if (max_iters < 1) throw ValidationError("max_iters must be >= 1");
  if (!(grad_tol > 0.0)) throw ValidationError("grad_tol must be > 0");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train_fraction must lie strictly between 0 and 1");
  }
}

DesignMatrix::DesignMatrix(std::size_t r, std::size_t c, std::vector<double> v)
    : rows(r), cols(c), values(std::move(v)) {
  if (values.size() != rows * cols) throw ShapeMismatch("design matrix storage size");
}

DesignMatrix to_design(const RepresentationMatrix& m) {
  DesignMatrix out(m.n, m.d_model);
  std::copy(m.data.begin(), m.data.end(), out.values.begin());
  return out;
}

DesignMatrix select_rows(const RepresentationMatrix& m, std::span<const std::size_t> rows) {
  DesignMatrix out(rows.size(), m.d_model);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto src = m.row(rows[k]);
    std::copy(src.begin(), src.end(), out.row(k).begin());
  }
  return out;
}

std::vector<std::uint8_t> select_labels(const LabelVector& y, std::span<const std::size_t> rows) {
  std::vector<std::uint8_t> out(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) out[k] = y[rows[k]];
  return out;
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double objective(std::span<const double> theta, double intercept, const DesignMatrix& x,
                 std::span<const std::uint8_t> y, double lambda) {
  check_shapes(theta.size(), x, y);
  if (x.rows == 0) throw EmptyInput("objective over an empty sample");
  check_binary(y);
  std::vector<double> s;
  linear_scores(x, theta, intercept, s);
  return objective_from_scores(s, y, penalty(theta), lambda);
}

Gradient gradient(std::span<const double> theta, double intercept, const DesignMatrix& x,
                  std::span<const std::uint8_t> y, double lambda) {
  check_shapes(theta.size(), x, y);
  if (x.rows == 0) throw EmptyInput("gradient over an empty sample");
  check_binary(y);
  std::vector<double> s;
  linear_scores(x, theta, intercept, s);
  Gradient g;
  gradient_from_scores(x, s, y, theta, lambda, g);
  return g;
}

SplitIndex split(std::size_t n, const ProbeConfig& config) {
  config.validate();
  if (n < 2) throw ValidationError("split needs at least 2 samples");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(config.split_seed);
  shuffle_indices(perm, rng);

  auto n_train = static_cast<std::size_t>(std::llround(config.train_fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

  SplitIndex out;
  out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

ProbeModel fit(const DesignMatrix& x_train, std::span<const std::uint8_t> y_train,
               const ProbeConfig& config, std::vector<double>* objective_trace) {
  config.validate();
  const std::size_t n = x_train.rows;
  const std::size_t m = x_train.cols;
  check_shapes(m, x_train, y_train);
  check_binary(y_train);
  if (n == 0) throw EmptyInput("fit on an empty training set");
  const auto positives = std::count(y_train.begin(), y_train.end(), std::uint8_t{1});
  if (positives == 0 || static_cast<std::size_t>(positives) == n) throw SingleClassTraining();
  for (std::size_t i = 0; i < x_train.values.size(); ++i) {
    if (!std::isfinite(x_train.values[i])) throw NonFiniteValue(i, "fit");
  }

  ProbeModel model;
  model.lambda = config.lambda;
  model.feature_means.assign(m, 0.0);
  model.feature_stds.assign(m, 1.0);
  std::vector<bool> pinned(m, false);

  if (config.standardize) {
    for (std::size_t j = 0; j < m; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += x_train(i, j);
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = x_train(i, j) - mean;
        var += d * d;
      }
      const double sd = std::sqrt(var / static_cast<double>(n));
      model.feature_means[j] = mean;
      if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
        pinned[j] = true;  // std stays 1, weight stays 0
      } else {
        model.feature_stds[j] = sd;
      }
    }
  }

  DesignMatrix z(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      z(i, j) = pinned[j] ? 0.0 : (x_train(i, j) - model.feature_means[j]) / model.feature_stds[j];
    }
  }

  std::vector<double> theta(m, 0.0);
  double b = 0.0;
  std::vector<double> scores;
  std::vector<double> trial_scores(n);
  std::vector<double> direction(n);
  std::vector<double> trial_theta(m);
  Gradient g;

  linear_scores(z, theta, b, scores);
  double j_cur = objective_from_scores(scores, y_train, 0.0, config.lambda);
  if (objective_trace) {
    objective_trace->clear();
    objective_trace->push_back(j_cur);
  }

  auto grad_norm = [&] {
    gradient_from_scores(z, scores, y_train, theta, config.lambda, g);
    double norm = std::abs(g.intercept);
    double sq = g.intercept * g.intercept;
    for (std::size_t j = 0; j < m; ++j) {
      if (pinned[j]) g.theta[j] = 0.0;
      norm = std::max(norm, std::abs(g.theta[j]));
      sq += g.theta[j] * g.theta[j];
    }
    if (!std::isfinite(norm)) throw NonFiniteEncountered("non-finite gradient during probe fit");
    return std::pair{norm, sq};
  };

  auto [norm, grad_sq] = grad_norm();
  while (model.iters_used < config.max_iters) {
    if (norm < config.grad_tol) {
      model.converged = true;
      break;
    }
    // scores move along -(Z g_theta + g_b) as the step grows.
    linear_scores(z, g.theta, g.intercept, direction);

    double step = 1.0;
    double j_new = 0.0;
    bool accepted = false;
    while (step >= kMinStep) {
      for (std::size_t i = 0; i < n; ++i) trial_scores[i] = scores[i] - step * direction[i];
      for (std::size_t j = 0; j < m; ++j) trial_theta[j] = theta[j] - step * g.theta[j];
      j_new = objective_from_scores(trial_scores, y_train, penalty(trial_theta), config.lambda);
      if (!std::isfinite(j_new)) throw NonFiniteEncountered("non-finite objective during probe fit");
      if (j_new <= j_cur - kArmijoC * step * grad_sq) {
        accepted = true;
        break;
      }
      step *= kShrink;
    }
    if (!accepted) break;  // no representable descent step left

    theta.swap(trial_theta);
    b -= step * g.intercept;
    // Recompute exactly rather than trusting the incremental update, so the
    // stored iterate and its scores never drift apart.
    linear_scores(z, theta, b, scores);
    j_cur = objective_from_scores(scores, y_train, penalty(theta), config.lambda);
    ++model.iters_used;
    if (objective_trace) objective_trace->push_back(j_cur);
    std::tie(norm, grad_sq) = grad_norm();
  }
  if (!model.converged && norm < config.grad_tol) model.converged = true;

  model.theta = std::move(theta);
  model.intercept = b;
  model.final_grad_norm = norm;
  model.final_objective = j_cur;
  return model;
}

PredictionVector predict(const ProbeModel& model, const DesignMatrix& x) {
  const std::size_t m = model.theta.size();
  if (x.cols != m) {
    throw ShapeMismatch("model expects " + std::to_string(m) + " features, X has " +
                        std::to_string(x.cols));
  }
  if (model.feature_means.size() != m || model.feature_stds.size() != m) {
    throw ShapeMismatch("model standardization statistics have the wrong length");
  }
  PredictionVector out;
  out.z.resize(x.rows);
  out.scores.resize(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto r = x.row(i);
    double s = model.intercept;
    for (std::size_t j = 0; j < m; ++j) {
      s += model.theta[j] * ((r[j] - model.feature_means[j]) / model.feature_stds[j]);
    }
    out.scores[i] = sigmoid(s);
    out.z[i] = out.scores[i] >= 0.5 ? 1 : 0;
  }
  return out;
}

nlohmann::json probe_to_json(const ProbeModel& model) {
  return {
      {"theta", model.theta},
      {"intercept", model.intercept},
      {"lambda", model.lambda},
      {"feature_means", model.feature_means},
      {"feature_stds", model.feature_stds},
      {"converged", model.converged},
      {"iters_used", model.iters_used},
      {"final_grad_norm", model.final_grad_norm},
      {"final_objective", model.final_objective},
  };
}

ProbeModel probe_from_json(const nlohmann::json& j) {
  ProbeModel m;
  try {
    m.theta = j.at("theta").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    m.lambda = j.at("lambda").get<double>();
    m.feature_means = j.at("feature_means").get<std::vector<double>>();
    m.feature_stds = j.at("feature_stds").get<std::vector<double>>();
    m.converged = j.at("converged").get<bool>();
    m.iters_used = j.at("iters_used").get<std::size_t>();
    m.final_grad_norm = j.at("final_grad_norm").get<double>();
    m.final_objective = j.at("final_objective").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("probe JSON: ") + e.what());
  }
  if (m.feature_means.size() != m.theta.size() || m.feature_stds.size() != m.theta.size()) {
    throw ShapeMismatch("probe JSON: statistics length differs from theta");
  }
  return m;
}

}  // namespace cdepth
