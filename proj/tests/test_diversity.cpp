#include "qfi/diversity.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "qfi/prng.hpp"

using namespace qfi;

namespace {

RankVector make_ranks(std::vector<int> ranks, RankSource source = RankSource::Quantum) {
  return RankVector{std::move(ranks), source};
}

TEST(RankFeatures, DescendingScores) {
  const std::vector<double> scores{0.5, 0.3, 0.2};
  EXPECT_EQ(rank_features(scores, RankSource::Quantum).rank_of, (std::vector<int>{1, 2, 3}));
}

TEST(RankFeatures, TiesBreakByIndex) {
  const std::vector<double> scores{0.4, 0.4, 0.2};
  EXPECT_EQ(rank_features(scores, RankSource::Quantum).rank_of, (std::vector<int>{1, 2, 3}));
}

TEST(RankFeatures, RandomScoresYieldPermutation) {
  Rng rng(31);
  std::vector<double> scores(146);
  for (auto& s : scores) s = rng.next_double();
  const RankVector ranks = rank_features(scores, RankSource::Quantum);
  std::vector<int> sorted = ranks.rank_of;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 146; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i + 1);
}

TEST(RankFeatures, InvariantUnderPositiveRescaling) {
  Rng rng(37);
  std::vector<double> scores(50);
  for (auto& s : scores) s = rng.next_double();
  std::vector<double> scaled = scores;
  for (auto& s : scaled) s *= 17.5;
  EXPECT_EQ(rank_features(scores, RankSource::Quantum).rank_of,
            rank_features(scaled, RankSource::Quantum).rank_of);
}

TEST(MaxRankDiff, FullScaleValueAt146) { EXPECT_EQ(max_rank_diff(146), 10658); }

TEST(MaxRankDiff, SmallCases) {
  EXPECT_EQ(max_rank_diff(1), 0);
  EXPECT_EQ(max_rank_diff(3), 4);
}

TEST(MaxRankDiff, ClosedFormCrossCheck) {
  for (int n = 1; n <= 200; ++n) {
    const long long closed = 2LL * (n / 2) * ((n + 1) / 2);
    EXPECT_EQ(max_rank_diff(n), closed) << "n = " << n;
  }
}

TEST(PctRankDiff, IdenticalRankingsGiveZero) {
  const RankVector a = make_ranks({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(pct_rank_diff(a, a, max_rank_diff(4)), 0.0);
}

TEST(PctRankDiff, OppositeRankingsGiveOne) {
  for (const int n : {2, 3, 7, 146}) {
    std::vector<int> asc(static_cast<std::size_t>(n)), desc(static_cast<std::size_t>(n));
    std::iota(asc.begin(), asc.end(), 1);
    for (int i = 0; i < n; ++i) desc[static_cast<std::size_t>(i)] = n - i;
    EXPECT_DOUBLE_EQ(
        pct_rank_diff(make_ranks(asc), make_ranks(desc), max_rank_diff(n)), 1.0);
  }
}

TEST(PctRankDiff, HandComputedCase) {
  const double v =
      pct_rank_diff(make_ranks({1, 2, 3}), make_ranks({2, 1, 3}), max_rank_diff(3));
  EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(PctRankDiff, DegenerateAndMismatchedInputsRejected) {
  EXPECT_THROW(pct_rank_diff(make_ranks({1}), make_ranks({1}), max_rank_diff(1)),
               ValidationError);
  EXPECT_THROW(pct_rank_diff(make_ranks({1, 2}), make_ranks({1}), max_rank_diff(2)),
               ValidationError);
}

TEST(PctRankDiff, SymmetricAndBoundedExhaustivelyAtN4) {
  std::vector<int> base{1, 2, 3, 4};
  std::vector<std::vector<int>> perms;
  std::vector<int> p = base;
  do {
    perms.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  ASSERT_EQ(perms.size(), 24u);
  const long long max_diff = max_rank_diff(4);
  for (const auto& a : perms)
    for (const auto& b : perms) {
      const double ab = pct_rank_diff(make_ranks(a), make_ranks(b), max_diff);
      const double ba = pct_rank_diff(make_ranks(b), make_ranks(a), max_diff);
      EXPECT_DOUBLE_EQ(ab, ba);
      EXPECT_GE(ab, 0.0);
      EXPECT_LE(ab, 1.0);
    }
}

TEST(RankDiffAvg, EqualAndOppositeEndpoints) {
  const RankVector q = make_ranks({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(rank_diff_avg(q, q, q), 0.0);
  const RankVector opposite = make_ranks({4, 3, 2, 1}, RankSource::Classical);
  EXPECT_DOUBLE_EQ(rank_diff_avg(q, opposite, make_ranks({4, 3, 2, 1}, RankSource::Sme)), 1.0);
}

TEST(ImportanceVariance, ConstantVectorIsZero) {
  EXPECT_DOUBLE_EQ(importance_variance(std::vector<double>{0.25, 0.25, 0.25, 0.25}), 0.0);
}

TEST(ImportanceVariance, HandComputedPair) {
  EXPECT_NEAR(importance_variance(std::vector<double>{0.1, 0.3}), 0.01, 1e-16);
}

TEST(FormatTriple, ReferenceRows) {
  EXPECT_EQ(format_triple({0.835, 0.638, 0.0648, RankSource::Quantum}),
            "83.5% @ 64% @ 0.0648");
  EXPECT_EQ(format_triple({0.950, 0.65, 0.00262, RankSource::Classical}),
            "95.0% @ 65% @ 0.00262");
}

TEST(FormatTriple, BoundaryValues) {
  EXPECT_EQ(format_triple({1.0, 0.0, 0.0, RankSource::Quantum}), "100.0% @ 0% @ 0.00");
}

TEST(SmeRanks, SupersetDroppedAndCompressed) {
  const std::vector<std::string> names{"a", "b", "c"};
  const std::map<std::string, int> sme{{"a", 40}, {"b", 7}, {"c", 99}, {"ghost", 1}};
  const RankVector ranks = sme_rank_vector(names, sme);
  // order by original rank: b(7) < a(40) < c(99) -> compressed 1, 2, 3
  EXPECT_EQ(ranks.rank_of, (std::vector<int>{2, 1, 3}));
  EXPECT_EQ(ranks.source, RankSource::Sme);
  EXPECT_EQ(sme_unmatched_count(names, sme), 1u);
}

TEST(SmeRanks, MissingFeatureRejected) {
  const std::vector<std::string> names{"a", "b"};
  const std::map<std::string, int> sme{{"a", 1}};
  EXPECT_THROW(sme_rank_vector(names, sme), ValidationError);
}

}  // namespace
