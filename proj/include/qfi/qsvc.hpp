#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qfi/errors.hpp"
#include "qfi/qkernel.hpp"

namespace qfi {

struct Metrics {
  double accuracy = 0.0;
  double f1 = 0.0;
  double recall = 0.0;
  double precision = 0.0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

// Standard binary metrics with class 1 as positive. Precision/recall fall
// back to 0 when their denominator is 0, and f1 likewise.
inline Metrics compute_metrics(std::span<const int> pred, std::span<const int> truth) {
  if (pred.empty() || pred.size() != truth.size())
    throw ValidationError("metrics require equal-length nonempty label vectors");
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] != 0 && pred[i] != 1) throw ValidationError("predicted labels must be 0/1");
    if (truth[i] != 0 && truth[i] != 1) throw ValidationError("true labels must be 0/1");
    if (pred[i] == 1 && truth[i] == 1) ++tp;
    else if (pred[i] == 0 && truth[i] == 0) ++tn;
    else if (pred[i] == 1) ++fp;
    else ++fn;
  }
  Metrics m;
  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(pred.size());
  m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

// Four-column row "accuracy f1 recall precision" with 4 decimals.
inline std::string format_metrics_row(const Metrics& m) {
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%.4f %.4f %.4f %.4f", m.accuracy, m.f1, m.recall,
                m.precision);
  return buf;
}

// Soft-margin SVM trained on a precomputed kernel. dual_coefficients hold
// alpha_i * y_i for every training point (zero for non-support points).
struct SvcModel {
  std::vector<double> dual_coefficients;
  double bias = 0.0;
  std::vector<int> support_indices;
  double C = 1.0;
  std::vector<int> training_labels;  // in {-1, +1}
};

struct SmoOptions {
  double tolerance = 1e-3;       // stop when the max KKT violation drops below this
  long long max_iterations = 0;  // 0 means the 1000*n default
};

// Optional per-iteration trace for diagnostics and tests.
struct SmoTrace {
  std::vector<double> objective;    // dual objective (maximization form)
  std::vector<double> sum_alpha_y;  // equality-constraint residual
  std::vector<double> min_alpha;
  std::vector<double> max_alpha_excess;  // max(alpha_i - C)
};

// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
inline double dual_objective(const KernelMatrix& K, std::span<const double> alpha,
                             std::span<const int> y_signed) {
  const std::size_t n = alpha.size();
  double linear = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    linear += alpha[i];
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j)
      quad += alpha[i] * alpha[j] * y_signed[i] * y_signed[j] * K.at(i, j);
  }
  return linear - 0.5 * quad;
}

namespace detail {

struct SmoResult {
  std::vector<double> alpha;
  double bias = 0.0;
  long long iterations = 0;
  double final_violation = 0.0;
};

// Sequential minimal optimization with maximal-violating-pair selection.
// Minimizes f(a) = 1/2 a^T Q a - e^T a with Q_ij = y_i y_j K_ij subject to
// 0 <= a_i <= C and y^T a = 0.
inline SmoResult smo_solve(const KernelMatrix& K, std::span<const int> y, double C,
                           double tolerance, long long max_iterations,
                           SmoTrace* trace = nullptr) {
  const std::size_t n = y.size();
  std::vector<double> alpha(n, 0.0);
  // gradient of f at alpha = 0 is -e
  std::vector<double> grad(n, -1.0);

  auto record = [&] {
    if (!trace) return;
    trace->objective.push_back(dual_objective(K, alpha, y));
    double say = 0.0, mn = std::numeric_limits<double>::infinity(), ex = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      say += alpha[i] * y[i];
      mn = std::min(mn, alpha[i]);
      ex = std::max(ex, alpha[i] - C);
    }
    trace->sum_alpha_y.push_back(say);
    trace->min_alpha.push_back(mn);
    trace->max_alpha_excess.push_back(ex);
  };
  record();

  SmoResult result;
  double violation = 0.0;
  long long it = 0;
  for (; it < max_iterations; ++it) {
    // maximal violating pair: i maximizes -y*grad over I_up, j minimizes over I_low
    int i = -1, j = -1;
    double up = -std::numeric_limits<double>::infinity();
    double low = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      const bool in_up = (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0.0);
      const bool in_low = (y[t] > 0 && alpha[t] > 0.0) || (y[t] < 0 && alpha[t] < C);
      if (in_up && v > up) {
        up = v;
        i = static_cast<int>(t);
      }
      if (in_low && v < low) {
        low = v;
        j = static_cast<int>(t);
      }
    }
    violation = up - low;
    if (i < 0 || j < 0 || violation < tolerance) break;

    const double kii = K.at(i, i), kjj = K.at(j, j), kij = K.at(i, j);
    double quad = kii + kjj - 2.0 * kij;
    if (quad <= 0.0) quad = 1e-12;

    const double old_i = alpha[i], old_j = alpha[j];
    if (y[i] != y[j]) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
      }
      if (diff > 0.0) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = C - diff; }
      } else {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = C + diff; }
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = sum - C; }
      } else {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
      }
      if (sum > C) {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = sum - C; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
      }
    }

    const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
    if (di == 0.0 && dj == 0.0) break;  // numerically stuck pair
    for (std::size_t t = 0; t < n; ++t)
      grad[t] += y[t] * (y[i] * K.at(t, i) * di + y[j] * K.at(t, j) * dj);
    record();
  }
  result.iterations = it;
  result.final_violation = violation;

  // Bias from free support vectors; -y*grad equals y_t - sum_j a_j y_j K_tj.
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0 && alpha[t] < C) {
      free_sum += -y[t] * grad[t];
      ++free_count;
    }
  }
  if (free_count > 0) {
    result.bias = free_sum / static_cast<double>(free_count);
  } else {
    double up = -std::numeric_limits<double>::infinity();
    double low = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      const bool in_up = (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0.0);
      const bool in_low = (y[t] > 0 && alpha[t] > 0.0) || (y[t] < 0 && alpha[t] < C);
      if (in_up) up = std::max(up, v);
      if (in_low) low = std::min(low, v);
    }
    result.bias = (up + low) / 2.0;
  }
  result.alpha = std::move(alpha);
  return result;
}

}  // namespace detail

inline SvcModel fit_precomputed(const KernelMatrix& K, std::span<const int> y01, double C,
                                const SmoOptions& options = {}) {
  if (K.rows == 0 || K.rows != K.cols) throw ValidationError("kernel must be square and nonempty");
  if (y01.size() != K.rows) throw ValidationError("label count does not match kernel size");
  if (!(C > 0.0)) throw ValidationError("C must be positive");
  for (std::size_t i = 0; i < K.rows; ++i)
    for (std::size_t j = i + 1; j < K.cols; ++j)
      if (std::abs(K.at(i, j) - K.at(j, i)) > 1e-10)
        throw ValidationError("train kernel is not symmetric");

  std::vector<int> y(y01.size());
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < y01.size(); ++i) {
    if (y01[i] != 0 && y01[i] != 1) throw ValidationError("labels must be 0/1");
    y[i] = y01[i] == 1 ? 1 : -1;
    (y[i] > 0 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw DegenerateLabelsError("training labels contain a single class");

  const long long max_it =
      options.max_iterations > 0 ? options.max_iterations
                                 : static_cast<long long>(K.rows) * 1000;  // 10 * n * 100
  const auto res = detail::smo_solve(K, y, C, options.tolerance, max_it, nullptr);

  SvcModel model;
  model.C = C;
  model.bias = res.bias;
  model.training_labels = std::move(y);
  model.dual_coefficients.resize(K.rows);
  for (std::size_t i = 0; i < K.rows; ++i) {
    model.dual_coefficients[i] = res.alpha[i] * model.training_labels[i];
    if (res.alpha[i] > 0.0) model.support_indices.push_back(static_cast<int>(i));
  }
  return model;
}

inline std::vector<double> decision_function(const SvcModel& model, const KernelMatrix& K_cross) {
  if (K_cross.cols != model.dual_coefficients.size())
    throw ValidationError("cross kernel has " + std::to_string(K_cross.cols) +
                          " columns, model was trained on " +
                          std::to_string(model.dual_coefficients.size()) + " points");
  std::vector<double> f(K_cross.rows, model.bias);
  for (std::size_t i = 0; i < K_cross.rows; ++i)
    for (std::size_t j = 0; j < K_cross.cols; ++j)
      f[i] += model.dual_coefficients[j] * K_cross.at(i, j);
  return f;
}

// Label 1 if the decision value is >= 0 (ties go to class 1), else 0.
inline std::vector<int> predict(const SvcModel& model, const KernelMatrix& K_cross) {
  const std::vector<double> f = decision_function(model, K_cross);
  std::vector<int> labels(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) labels[i] = f[i] >= 0.0 ? 1 : 0;
  return labels;
}

inline nlohmann::json svc_to_json(const SvcModel& model) {
  return nlohmann::json{{"dual_coefficients", model.dual_coefficients},
                        {"bias", model.bias},
                        {"support_indices", model.support_indices},
                        {"C", model.C},
                        {"training_labels", model.training_labels}};
}

inline SvcModel svc_from_json(const nlohmann::json& j) {
  SvcModel model;
  j.at("dual_coefficients").get_to(model.dual_coefficients);
  j.at("bias").get_to(model.bias);
  j.at("support_indices").get_to(model.support_indices);
  j.at("C").get_to(model.C);
  j.at("training_labels").get_to(model.training_labels);
  return model;
}

}  // namespace qfi
