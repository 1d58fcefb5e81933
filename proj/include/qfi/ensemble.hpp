#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "qfi/errors.hpp"
#include "qfi/qsvc.hpp"
#include "qfi/tiers.hpp"
#include "qfi/xai.hpp"

namespace qfi {

// Outcome of one tier experiment: the tier's model accuracy plus the raw
// importance scores over that tier's features (in tier order).
struct TierResult {
  int tier_id = 0;
  double model_accuracy = 0.0;
  ImportanceVector importance;
  Metrics metrics;
};

// Accuracy-rewarded, simplex-normalized importance over all features.
struct GlobalImportance {
  std::vector<double> scores;
  std::string provenance;  // model family + explainer, e.g. "qsvc+pi"
};

// fir = 1/2 * (e^accuracy * x + tan(accuracy) * x) + x, with accuracy the
// fraction in [0, 1] evaluated in radians / natural base.
inline double reward(double raw_importance, double accuracy) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0))
    throw ValidationError("accuracy must be in [0, 1], got " + std::to_string(accuracy));
  return 0.5 * (std::exp(accuracy) * raw_importance + std::tan(accuracy) * raw_importance) +
         raw_importance;
}

// Floors negative entries to 0, then divides by the sum so the output lies on
// the simplex.
inline std::vector<double> normalize(std::vector<double> fir) {
  double total = 0.0;
  for (double& v : fir) {
    if (v < 0.0) v = 0.0;
    total += v;
  }
  if (!(total > 0.0))
    throw DegenerateNormalizationError("importance sums to zero after flooring negatives");
  for (double& v : fir) v /= total;
  return fir;
}

// Rewards each tier's raw importances with that tier's model accuracy, places
// them at their global feature indices, and normalizes. Aggregate accuracy is
// the unweighted mean over tiers.
inline std::pair<GlobalImportance, double> aggregate_tiers(std::span<const TierResult> results,
                                                           const TierAssignment& assignment) {
  const std::size_t n_tiers = assignment.tiers.size();
  if (results.size() != n_tiers)
    throw ValidationError("expected " + std::to_string(n_tiers) + " tier results, got " +
                          std::to_string(results.size()));
  std::vector<const TierResult*> by_tier(n_tiers, nullptr);
  for (const TierResult& r : results) {
    if (r.tier_id < 0 || static_cast<std::size_t>(r.tier_id) >= n_tiers)
      throw ValidationError("tier id " + std::to_string(r.tier_id) + " out of range");
    if (by_tier[static_cast<std::size_t>(r.tier_id)])
      throw ValidationError("duplicate result for tier " + std::to_string(r.tier_id));
    by_tier[static_cast<std::size_t>(r.tier_id)] = &r;
  }

  std::vector<double> rewarded(assignment.tier_of.size(), 0.0);
  double accuracy_sum = 0.0;
  for (std::size_t t = 0; t < n_tiers; ++t) {
    const TierResult& r = *by_tier[t];
    const auto& features = assignment.tiers[t];
    if (r.importance.scores.size() != features.size())
      throw ValidationError("tier " + std::to_string(t) + " importance length mismatch");
    for (std::size_t k = 0; k < features.size(); ++k)
      rewarded[static_cast<std::size_t>(features[k])] =
          reward(r.importance.scores[k], r.model_accuracy);
    accuracy_sum += r.model_accuracy;
  }

  GlobalImportance global;
  global.scores = normalize(std::move(rewarded));
  if (!results.empty()) {
    global.provenance = results[0].importance.model_id;
  }
  return {std::move(global), accuracy_sum / static_cast<double>(n_tiers)};
}

inline std::string global_importance_to_csv(const GlobalImportance& importance,
                                            std::span<const std::string> feature_names) {
  if (feature_names.size() != importance.scores.size())
    throw ValidationError("feature name count does not match importance length");
  std::string out = "feature_index,feature_name,normalized_score\n";
  char buf[64];
  for (std::size_t i = 0; i < importance.scores.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", importance.scores[i]);
    out += std::to_string(i) + "," + feature_names[i] + "," + buf + "\n";
  }
  return out;
}

}  // namespace qfi
