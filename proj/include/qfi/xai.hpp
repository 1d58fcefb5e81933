#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qfi/errors.hpp"
#include "qfi/matrix.hpp"
#include "qfi/parallel.hpp"
#include "qfi/prng.hpp"

namespace qfi {

enum class ExplainerMethod { PI, ALE };

inline const char* explainer_name(ExplainerMethod m) {
  return m == ExplainerMethod::PI ? "PI" : "ALE";
}

struct ImportanceVector {
  std::vector<double> scores;
  ExplainerMethod method = ExplainerMethod::PI;
  std::string model_id;
};

// Batch prediction: one real value per row.
using PredictFn = std::function<std::vector<double>(const Matrix&)>;
// Scores a dataset against labels; by convention this is accuracy.
using ScoreFn = std::function<double(const Matrix&, const std::vector<int>&)>;

namespace detail {

inline constexpr std::uint64_t kPiStream = 0x5049;

}  // namespace detail

// Permutation importance: i_j = s - mean_k s_{k,j}, where s is the baseline
// score and s_{k,j} the score with column j reshuffled by a seeded permutation.
// Negative values are legal: a permuted score can beat the baseline. Each
// (feature, repeat) cell uses its own derived substream, so parallel and
// serial execution produce identical results, and X is never mutated.
inline ImportanceVector permutation_importance(const ScoreFn& score_fn, const Matrix& X,
                                               const std::vector<int>& y, int n_repeats,
                                               std::uint64_t seed, std::string model_id = {},
                                               unsigned n_threads = 1) {
  if (X.rows() == 0 || X.cols() == 0) throw ValidationError("permutation importance needs data");
  if (n_repeats < 1) throw ValidationError("n_repeats must be >= 1");
  const double baseline = score_fn(X, y);

  const std::size_t n_features = X.cols();
  const std::size_t cells = n_features * static_cast<std::size_t>(n_repeats);
  std::vector<double> permuted_scores(cells);
  parallel_for(
      cells,
      [&](std::size_t cell) {
        const std::size_t j = cell / static_cast<std::size_t>(n_repeats);
        const std::size_t k = cell % static_cast<std::size_t>(n_repeats);
        Rng rng(derive_seed(derive_seed(seed, detail::kPiStream), j, k));
        std::vector<double> column = X.column(j);
        rng.shuffle(column);
        Matrix shuffled = X;
        shuffled.set_column(j, column);
        permuted_scores[cell] = score_fn(shuffled, y);
      },
      n_threads);

  ImportanceVector importance;
  importance.method = ExplainerMethod::PI;
  importance.model_id = std::move(model_id);
  importance.scores.resize(n_features);
  for (std::size_t j = 0; j < n_features; ++j) {
    double mean = 0.0;
    for (int k = 0; k < n_repeats; ++k)
      mean += permuted_scores[j * static_cast<std::size_t>(n_repeats) + k];
    mean /= static_cast<double>(n_repeats);
    importance.scores[j] = baseline - mean;
  }
  return importance;
}

// Accumulated local effects curve for one feature. interval_edges are the
// empirical quantile grid (duplicates collapsed), centered_effects the
// accumulated per-interval mean prediction differences shifted so the
// sample-weighted mean effect is zero.
struct AleCurve {
  int feature_index = 0;
  std::vector<double> interval_edges;
  std::vector<double> centered_effects;       // one per edge
  std::vector<std::size_t> interval_counts;   // one per interval
};

namespace detail {

// Linear-interpolation empirical quantile on sorted data.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

inline AleCurve ale_curve(const PredictFn& predict_fn, const Matrix& X, int feature_j,
                          int n_intervals) {
  if (X.rows() == 0) throw ValidationError("ALE needs a nonempty data matrix");
  if (feature_j < 0 || static_cast<std::size_t>(feature_j) >= X.cols())
    throw ValidationError("feature index out of range");
  if (n_intervals < 1) throw ValidationError("n_intervals must be >= 1");

  std::vector<double> sorted = X.column(static_cast<std::size_t>(feature_j));
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back())
    throw DegenerateFeatureError("feature " + std::to_string(feature_j) +
                                 " is constant; no local effects exist");

  std::vector<double> edges;
  edges.reserve(n_intervals + 1);
  for (int k = 0; k <= n_intervals; ++k) {
    const double q = detail::quantile_sorted(sorted, static_cast<double>(k) / n_intervals);
    if (edges.empty() || q > edges.back()) edges.push_back(q);
  }
  const std::size_t m = edges.size() - 1;

  // Assign each sample to the interval (edge_{k-1}, edge_k]; the minimum
  // lands in interval 1.
  const std::vector<double> column = X.column(static_cast<std::size_t>(feature_j));
  std::vector<std::vector<int>> members(m + 1);
  for (std::size_t r = 0; r < X.rows(); ++r) {
    std::size_t k = static_cast<std::size_t>(
        std::lower_bound(edges.begin() + 1, edges.end(), column[r]) - edges.begin());
    k = std::clamp<std::size_t>(k, 1, m);
    members[k].push_back(static_cast<int>(r));
  }

  std::vector<double> accumulated(m + 1, 0.0);
  for (std::size_t k = 1; k <= m; ++k) {
    double mean_effect = 0.0;
    if (!members[k].empty()) {
      Matrix rows = X.select_rows(members[k]);
      Matrix upper = rows;
      upper.fill_column(static_cast<std::size_t>(feature_j), edges[k]);
      Matrix lower = std::move(rows);
      lower.fill_column(static_cast<std::size_t>(feature_j), edges[k - 1]);
      const std::vector<double> pred_upper = predict_fn(upper);
      const std::vector<double> pred_lower = predict_fn(lower);
      for (std::size_t i = 0; i < members[k].size(); ++i)
        mean_effect += pred_upper[i] - pred_lower[i];
      mean_effect /= static_cast<double>(members[k].size());
    }
    accumulated[k] = accumulated[k - 1] + mean_effect;
  }

  // Center so the sample-weighted mean effect is zero.
  double center = 0.0;
  for (std::size_t k = 1; k <= m; ++k)
    center += static_cast<double>(members[k].size()) * accumulated[k];
  center /= static_cast<double>(X.rows());

  AleCurve curve;
  curve.feature_index = feature_j;
  curve.interval_edges = std::move(edges);
  curve.centered_effects.resize(m + 1);
  for (std::size_t k = 0; k <= m; ++k) curve.centered_effects[k] = accumulated[k] - center;
  curve.interval_counts.resize(m);
  for (std::size_t k = 1; k <= m; ++k) curve.interval_counts[k - 1] = members[k].size();
  return curve;
}

// Scalar importance of an ALE curve: the range of its centered effects.
inline double ale_importance(const AleCurve& curve) {
  if (curve.centered_effects.empty()) return 0.0;
  const auto [mn, mx] =
      std::minmax_element(curve.centered_effects.begin(), curve.centered_effects.end());
  return *mx - *mn;
}

// Marginal-average partial dependence of predict_fn at feature_j = x_value.
inline double pdp_value(const PredictFn& predict_fn, const Matrix& X, int feature_j,
                        double x_value) {
  if (X.rows() == 0) throw ValidationError("PDP needs a nonempty data matrix");
  if (feature_j < 0 || static_cast<std::size_t>(feature_j) >= X.cols())
    throw ValidationError("feature index out of range");
  Matrix modified = X;
  modified.fill_column(static_cast<std::size_t>(feature_j), x_value);
  const std::vector<double> preds = predict_fn(modified);
  double mean = 0.0;
  for (const double p : preds) mean += p;
  return mean / static_cast<double>(preds.size());
}

inline std::string importance_to_csv(const ImportanceVector& importance,
                                     std::span<const std::string> feature_names) {
  if (feature_names.size() != importance.scores.size())
    throw ValidationError("feature name count does not match importance length");
  std::string out = "feature_index,feature_name,score,method,model_id\n";
  char buf[64];
  for (std::size_t i = 0; i < importance.scores.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", importance.scores[i]);
    out += std::to_string(i) + "," + feature_names[i] + "," + buf + "," +
           explainer_name(importance.method) + "," + importance.model_id + "\n";
  }
  return out;
}

}  // namespace qfi
