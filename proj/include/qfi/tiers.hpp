#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "qfi/errors.hpp"
#include "qfi/matrix.hpp"
#include "qfi/prng.hpp"

namespace qfi {

// Partition of feature indices into ordered tiers. Tier 0 holds the features
// most correlated with the label; all tiers have tier_size features except
// possibly the last.
struct TierAssignment {
  std::vector<int> tier_of;
  std::vector<std::vector<int>> tiers;
  int tier_size = 0;

  friend bool operator==(const TierAssignment&, const TierAssignment&) = default;
};

// Features ordered by |Pearson correlation with the label| descending.
// Zero-variance columns get correlation 0; ties break by ascending index.
inline std::vector<int> rank_by_label_correlation(const Matrix& X, std::span<const int> y) {
  if (X.rows() < 2) throw ValidationError("correlation ranking needs at least 2 rows");
  if (y.size() != X.rows()) throw ValidationError("label count does not match data rows");
  for (const int label : y)
    if (label != 0 && label != 1) throw ValidationError("labels must be 0/1");

  const double n = static_cast<double>(X.rows());
  double y_mean = 0.0;
  for (const int label : y) y_mean += label;
  y_mean /= n;
  double y_var = 0.0;
  for (const int label : y) y_var += (label - y_mean) * (label - y_mean);

  std::vector<double> abs_r(X.cols(), 0.0);
  for (std::size_t j = 0; j < X.cols(); ++j) {
    double x_mean = 0.0;
    for (std::size_t r = 0; r < X.rows(); ++r) x_mean += X(r, j);
    x_mean /= n;
    double x_var = 0.0, cov = 0.0;
    for (std::size_t r = 0; r < X.rows(); ++r) {
      const double dx = X(r, j) - x_mean;
      x_var += dx * dx;
      cov += dx * (y[r] - y_mean);
    }
    abs_r[j] = (x_var > 0.0 && y_var > 0.0) ? std::abs(cov / std::sqrt(x_var * y_var)) : 0.0;
  }

  std::vector<int> order(X.cols());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (abs_r[a] != abs_r[b]) return abs_r[a] > abs_r[b];
    return a < b;
  });
  return order;
}

// Chunks the ordering into consecutive tiers of tier_size features.
inline TierAssignment assign_tiers(std::span<const int> ordering, int n_features, int tier_size) {
  if (tier_size < 1) throw ValidationError("tier_size must be >= 1");
  if (static_cast<int>(ordering.size()) != n_features)
    throw ValidationError("ordering length does not match feature count");
  std::vector<bool> seen(n_features, false);
  for (const int f : ordering) {
    if (f < 0 || f >= n_features || seen[f])
      throw ValidationError("ordering is not a permutation of the feature indices");
    seen[f] = true;
  }
  TierAssignment assignment;
  assignment.tier_size = tier_size;
  assignment.tier_of.assign(n_features, -1);
  for (int start = 0; start < n_features; start += tier_size) {
    const int end = std::min(start + tier_size, n_features);
    std::vector<int> tier(ordering.begin() + start, ordering.begin() + end);
    const int tier_id = static_cast<int>(assignment.tiers.size());
    for (const int f : tier) assignment.tier_of[f] = tier_id;
    assignment.tiers.push_back(std::move(tier));
  }
  return assignment;
}

// Angle-encoding scale target. At s the ZZ map's single-qubit phases span
// [0, 2s] and its pair phases span 2*pi^2 - 2*(pi - s)^2; both stay within
// one 2*pi period iff s <= pi - sqrt(pi^2 - pi) ~= 0.547. Stretching all the
// way to pi wraps the pair phases three times over and collapses the kernel
// bandwidth.
inline constexpr double kScaleTarget = 0.5;

// Per-feature min/max fitted on training data.
struct ScalingParams {
  std::vector<double> min;
  std::vector<double> max;
};

inline ScalingParams fit_scaling(const Matrix& X_train) {
  if (X_train.rows() == 0) throw ValidationError("scaling requires nonempty training data");
  ScalingParams params;
  params.min.resize(X_train.cols());
  params.max.resize(X_train.cols());
  for (std::size_t j = 0; j < X_train.cols(); ++j) {
    double lo = X_train(0, j), hi = X_train(0, j);
    for (std::size_t r = 1; r < X_train.rows(); ++r) {
      lo = std::min(lo, X_train(r, j));
      hi = std::max(hi, X_train(r, j));
    }
    params.min[j] = lo;
    params.max[j] = hi;
  }
  return params;
}

// x' = kScaleTarget * (x - min) / (max - min), clipped to [0, kScaleTarget].
// Constant features map to the midpoint.
inline Matrix apply_scaling(const ScalingParams& params, const Matrix& X) {
  if (params.min.size() != X.cols()) throw ValidationError("scaling params dimension mismatch");
  Matrix scaled(X.rows(), X.cols());
  for (std::size_t j = 0; j < X.cols(); ++j) {
    const double range = params.max[j] - params.min[j];
    for (std::size_t r = 0; r < X.rows(); ++r) {
      if (range <= 0.0) {
        scaled(r, j) = kScaleTarget / 2.0;
      } else {
        scaled(r, j) =
            std::clamp(kScaleTarget * (X(r, j) - params.min[j]) / range, 0.0, kScaleTarget);
      }
    }
  }
  return scaled;
}

struct TrainTestSplit {
  std::vector<int> train_indices;
  std::vector<int> test_indices;
};

// Seeded stratified split: per-class quotas by largest remainder, per-class
// membership by seeded shuffle, indices returned sorted ascending. Both
// classes land in both parts whenever they have enough members.
inline TrainTestSplit split(const Matrix& X, std::span<const int> y, double train_fraction,
                            std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("train_fraction must be in (0, 1)");
  if (y.size() != X.rows()) throw ValidationError("label count does not match data rows");
  const std::size_t n = y.size();
  const long long n_train = std::llround(train_fraction * static_cast<double>(n));
  if (n_train <= 0 || static_cast<std::size_t>(n_train) >= n)
    throw ValidationError("too few rows to split into nonempty train and test parts");

  std::vector<int> class_rows[2];
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] != 0 && y[i] != 1) throw ValidationError("labels must be 0/1");
    class_rows[y[i]].push_back(static_cast<int>(i));
  }

  // largest-remainder apportionment of the train quota over classes
  long long quota[2];
  double remainder[2];
  long long assigned = 0;
  for (int c = 0; c < 2; ++c) {
    const double exact = train_fraction * static_cast<double>(class_rows[c].size());
    quota[c] = static_cast<long long>(exact);
    remainder[c] = exact - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  while (assigned < n_train) {
    const int c = remainder[0] >= remainder[1] ? 0 : 1;
    ++quota[c];
    remainder[c] = -1.0;
    ++assigned;
  }
  for (int c = 0; c < 2; ++c)
    quota[c] = std::min<long long>(quota[c], static_cast<long long>(class_rows[c].size()));

  // keep both classes represented on both sides when their size allows it
  for (int c = 0; c < 2; ++c) {
    const int other = 1 - c;
    const long long size_c = static_cast<long long>(class_rows[c].size());
    const long long size_o = static_cast<long long>(class_rows[other].size());
    if (size_c >= 2 && quota[c] == 0 && quota[other] >= 2) {
      ++quota[c];
      --quota[other];
    }
    if (size_c >= 2 && quota[c] == size_c && size_o - quota[other] >= 2) {
      --quota[c];
      ++quota[other];
    }
  }

  TrainTestSplit result;
  for (int c = 0; c < 2; ++c) {
    Rng rng(derive_seed(seed, 0x53504C49ULL, static_cast<std::uint64_t>(c)));
    std::vector<int> rows = class_rows[c];
    rng.shuffle(rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<long long>(i) < quota[c]) result.train_indices.push_back(rows[i]);
      else result.test_indices.push_back(rows[i]);
    }
  }
  std::sort(result.train_indices.begin(), result.train_indices.end());
  std::sort(result.test_indices.begin(), result.test_indices.end());
  return result;
}

// Tier map CSV: feature_name,tier_id. Round-trips the external tiering input.
inline std::string tier_map_to_csv(const TierAssignment& assignment,
                                   std::span<const std::string> feature_names) {
  if (feature_names.size() != assignment.tier_of.size())
    throw ValidationError("feature name count does not match tier assignment");
  std::string out = "feature_name,tier_id\n";
  for (const auto& tier : assignment.tiers)
    for (const int f : tier)
      out += feature_names[static_cast<std::size_t>(f)] + "," +
             std::to_string(assignment.tier_of[static_cast<std::size_t>(f)]) + "\n";
  return out;
}

inline TierAssignment tier_map_from_csv(const std::string& text,
                                        std::span<const std::string> feature_names) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("tier map is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "feature_name,tier_id")
    throw IngestionError("tier map header must be 'feature_name,tier_id'");

  std::vector<std::pair<std::string, int>> entries;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw IngestionError("tier map line " + std::to_string(line_no) + ": missing comma");
    const std::string name = line.substr(0, comma);
    int tier_id = 0;
    try {
      std::size_t used = 0;
      tier_id = std::stoi(line.substr(comma + 1), &used);
      if (used != line.size() - comma - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw IngestionError("tier map line " + std::to_string(line_no) + ": bad tier id");
    }
    if (tier_id < 0)
      throw IngestionError("tier map line " + std::to_string(line_no) + ": negative tier id");
    entries.emplace_back(name, tier_id);
  }

  std::vector<int> tier_of(feature_names.size(), -1);
  int max_tier = -1;
  for (const auto& [name, tier_id] : entries) {
    const auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end())
      throw IngestionError("tier map names unknown feature '" + name + "'");
    const auto idx = static_cast<std::size_t>(it - feature_names.begin());
    if (tier_of[idx] != -1) throw IngestionError("tier map repeats feature '" + name + "'");
    tier_of[idx] = tier_id;
    max_tier = std::max(max_tier, tier_id);
  }
  for (std::size_t f = 0; f < tier_of.size(); ++f)
    if (tier_of[f] == -1)
      throw IngestionError("tier map is missing feature '" + feature_names[f] + "'");

  TierAssignment assignment;
  assignment.tier_of = tier_of;
  assignment.tiers.assign(static_cast<std::size_t>(max_tier + 1), {});
  // preserve file order within each tier
  for (const auto& [name, tier_id] : entries) {
    const auto it = std::find(feature_names.begin(), feature_names.end(), name);
    assignment.tiers[static_cast<std::size_t>(tier_id)].push_back(
        static_cast<int>(it - feature_names.begin()));
  }
  for (const auto& tier : assignment.tiers)
    if (tier.empty()) throw IngestionError("tier map has an empty tier before the last one");
  assignment.tier_size = static_cast<int>(assignment.tiers.front().size());
  return assignment;
}

}  // namespace qfi
