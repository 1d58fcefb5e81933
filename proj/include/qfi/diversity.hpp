#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qfi/ensemble.hpp"
#include "qfi/errors.hpp"

namespace qfi {

enum class RankSource { Quantum, Classical, Sme };

inline const char* rank_source_name(RankSource s) {
  switch (s) {
    case RankSource::Quantum: return "quantum";
    case RankSource::Classical: return "classical";
    default: return "sme";
  }
}

// rank_of[i] is the 1-based rank of feature i; rank 1 = largest score.
struct RankVector {
  std::vector<int> rank_of;
  RankSource source = RankSource::Quantum;

  friend bool operator==(const RankVector&, const RankVector&) = default;
};

// Ranks by score magnitude descending; ties break by ascending feature index.
inline RankVector rank_features(std::span<const double> scores, RankSource source) {
  if (scores.empty()) throw ValidationError("cannot rank an empty score vector");
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  RankVector ranks;
  ranks.source = source;
  ranks.rank_of.resize(scores.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    ranks.rank_of[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos) + 1;
  return ranks;
}

inline RankVector rank_features(const GlobalImportance& importance, RankSource source) {
  return rank_features(std::span<const double>(importance.scores), source);
}

// Largest possible L1 distance between two rankings of n items: the distance
// between the ascending and descending orders, sum_i |2i - (n+1)|.
inline long long max_rank_diff(int n) {
  if (n < 1) throw ValidationError("feature count must be >= 1");
  long long total = 0;
  for (int i = 1; i <= n; ++i) total += std::llabs(2LL * i - (n + 1LL));
  return total;
}

// L1 rank distance scaled by max_diff, in [0, 1].
inline double pct_rank_diff(const RankVector& a, const RankVector& b, long long max_diff) {
  if (a.rank_of.size() != b.rank_of.size())
    throw ValidationError("rank vectors have different lengths");
  if (max_diff <= 0)
    throw ValidationError("max rank difference is zero; need at least 2 features");
  long long total = 0;
  for (std::size_t i = 0; i < a.rank_of.size(); ++i)
    total += std::llabs(static_cast<long long>(a.rank_of[i]) - b.rank_of[i]);
  return static_cast<double>(total) / static_cast<double>(max_diff);
}

// Mean of the primary ranking's percent rank difference against the other
// model and against the SME ranking.
inline double rank_diff_avg(const RankVector& primary, const RankVector& other,
                            const RankVector& sme) {
  const long long max_diff = max_rank_diff(static_cast<int>(primary.rank_of.size()));
  return 0.5 * (pct_rank_diff(primary, other, max_diff) + pct_rank_diff(primary, sme, max_diff));
}

// Population variance (1/n) sum (p_i - mu)^2.
inline double importance_variance(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("variance of an empty vector");
  double mean = 0.0;
  for (const double p : scores) mean += p;
  mean /= static_cast<double>(scores.size());
  double var = 0.0;
  for (const double p : scores) var += (p - mean) * (p - mean);
  return var / static_cast<double>(scores.size());
}

// accuracy @ average percent rank difference @ importance variance.
struct DiversityTriple {
  double accuracy = 0.0;
  double rank_diff_avg = 0.0;
  double variance = 0.0;
  RankSource side = RankSource::Quantum;
};

namespace detail {

// Three significant figures; zero renders as "0.00".
inline std::string three_sig_figs(double v) {
  char buf[64];
  int decimals = 2;
  if (v != 0.0)
    decimals = std::max(0, 2 - static_cast<int>(std::floor(std::log10(std::abs(v)))));
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace detail

// "83.5% @ 64% @ 0.0648": accuracy to one decimal percent, rank difference to
// a whole percent, variance to three significant figures.
inline std::string format_triple(const DiversityTriple& t) {
  char head[64];
  std::snprintf(head, sizeof(head), "%.1f%% @ %.0f%% @ ", t.accuracy * 100.0,
                t.rank_diff_avg * 100.0);
  return std::string(head) + detail::three_sig_figs(t.variance);
}

// Matches SME ranks (by feature name) to the dataset's features. Map entries
// that name no dataset feature are dropped; the surviving ranks are
// re-compressed to 1..n preserving their order. Every dataset feature must be
// covered.
inline RankVector sme_rank_vector(std::span<const std::string> feature_names,
                                  const std::map<std::string, int>& sme_ranks) {
  std::vector<std::pair<int, int>> matched;  // (sme rank, feature index)
  matched.reserve(feature_names.size());
  for (std::size_t f = 0; f < feature_names.size(); ++f) {
    const auto it = sme_ranks.find(feature_names[f]);
    if (it == sme_ranks.end())
      throw ValidationError("SME ranks do not cover feature '" + feature_names[f] + "'");
    matched.emplace_back(it->second, static_cast<int>(f));
  }
  std::sort(matched.begin(), matched.end());
  RankVector ranks;
  ranks.source = RankSource::Sme;
  ranks.rank_of.resize(feature_names.size());
  for (std::size_t pos = 0; pos < matched.size(); ++pos)
    ranks.rank_of[static_cast<std::size_t>(matched[pos].second)] = static_cast<int>(pos) + 1;
  return ranks;
}

// Count of SME map entries that name no dataset feature (reported as a
// warning by the CLI; the expert list may legitimately be a superset).
inline std::size_t sme_unmatched_count(std::span<const std::string> feature_names,
                                       const std::map<std::string, int>& sme_ranks) {
  std::size_t unmatched = 0;
  for (const auto& [name, rank] : sme_ranks)
    if (std::find(feature_names.begin(), feature_names.end(), name) == feature_names.end())
      ++unmatched;
  return unmatched;
}

}  // namespace qfi
