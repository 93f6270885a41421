#include <gtest/gtest.h>

#include <random>

#include "ganeye/agreement.hpp"
#include "ganeye/agreement_io.hpp"
#include "ganeye/error.hpp"
#include "support/oracles.hpp"

using namespace ganeye;

namespace {

constexpr auto H = Category::highly_likely_gan;
constexpr auto L = Category::likely_gan;
constexpr auto N = Category::not_gan;

}  // namespace

TEST(Kappa, HandCases) {
  EXPECT_NEAR(cohen_kappa(std::vector<std::pair<int, int>>{{1, 1}, {1, 2}, {2, 1}, {2, 2}}), 0.0, 1e-15);
  EXPECT_EQ(cohen_kappa(std::vector<std::pair<int, int>>{{1, 1}, {2, 2}, {3, 3}}), 1.0);
  // Both annotators always say the same single category: p_e = 1.
  EXPECT_EQ(cohen_kappa(std::vector<std::pair<int, int>>{{3, 3}, {3, 3}}), 1.0);
  // Systematic disagreement.
  EXPECT_NEAR(cohen_kappa(std::vector<std::pair<int, int>>{{1, 2}, {2, 1}}), -1.0, 1e-15);
  EXPECT_THROW(cohen_kappa(std::vector<std::pair<int, int>>{}), InvalidInput);
}

TEST(Kappa, MatchesConfusionMatrixOracle) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> cat(1, 3), len(2, 80);
  for (int t = 0; t < 300; ++t) {
    std::vector<int> a(len(rng)), b(a.size());
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = cat(rng);
      b[i] = (i % 3 == 0) ? a[i] : cat(rng);
      pairs.emplace_back(a[i], b[i]);
    }
    EXPECT_NEAR(cohen_kappa(pairs), oracle::kappa_confusion(a, b, 3), 1e-12);
  }
}

TEST(Kappa, SymmetricInAnnotators) {
  std::vector<std::pair<Category, Category>> p{{H, L}, {L, L}, {N, H}, {N, N}, {H, H}};
  std::vector<std::pair<Category, Category>> q;
  for (auto [x, y] : p) q.emplace_back(y, x);
  EXPECT_DOUBLE_EQ(cohen_kappa(p), cohen_kappa(q));
}

TEST(Consensus, StrictAndLoose) {
  const std::vector<std::string> ids{"a", "b", "c", "d", "e"};
  CurrentLabels labels;
  labels["ann1"] = {{"a", H}, {"b", H}, {"c", L}, {"d", N}, {"e", H}};
  labels["ann2"] = {{"a", H}, {"b", L}, {"c", L}, {"d", N}};
  const auto s = consensus_sets(ids, labels);
  EXPECT_EQ(s.counts.n_candidates, 5u);
  EXPECT_EQ(s.counts.n_doubly_labeled, 4u);
  EXPECT_EQ(s.counts.strict, 1u);
  EXPECT_EQ(s.counts.loose, 3u);
  EXPECT_EQ(s.strict_ids, (std::vector<std::string>{"a"}));
  EXPECT_EQ(s.loose_ids, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(s.pairs.size(), 4u);
}

TEST(Consensus, InvariantsUnderRandomLabels) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> cat(0, 3);  // 0 = unlabeled
  std::vector<std::string> ids;
  for (int i = 0; i < 100; ++i) ids.push_back("i" + std::to_string(i));
  for (int t = 0; t < 50; ++t) {
    CurrentLabels labels;
    for (const char* who : {"x", "y"}) {
      for (const auto& id : ids) {
        if (int c = cat(rng)) labels[who][id] = *category_from_int(c);
      }
    }
    const auto c = consensus_counts(ids, labels);
    EXPECT_LE(c.strict, c.loose);
    EXPECT_LE(c.loose, c.n_doubly_labeled);
    EXPECT_LE(c.n_doubly_labeled, c.n_candidates);
  }
}

TEST(Consensus, FewerThanTwoAnnotators) {
  const std::vector<std::string> ids{"a"};
  CurrentLabels labels;
  labels["only"] = {{"a", H}};
  const auto c = consensus_counts(ids, labels);
  EXPECT_EQ(c.n_doubly_labeled, 0u);
  EXPECT_EQ(c.strict, 0u);
}

TEST(Consensus, MoreThanTwoAnnotatorsUnsupported) {
  const std::vector<std::string> ids{"a"};
  CurrentLabels labels;
  labels["p"] = {{"a", H}};
  labels["q"] = {{"a", H}};
  labels["r"] = {{"a", H}};
  EXPECT_THROW(consensus_counts(ids, labels), UnsupportedConfiguration);
}

TEST(RenderPercent, PublishedFigures) {
  EXPECT_EQ(render_percent(54, 254275), "0.021%");
  EXPECT_EQ(render_percent(113, 254275), "0.044%");
}

TEST(RenderPercent, RoundsHalfAwayFromZero) {
  EXPECT_EQ(render_percent(1, 200000), "0.001%");   // exactly 0.0005%
  EXPECT_EQ(render_percent(3, 200000), "0.002%");   // exactly 0.0015%
  EXPECT_EQ(render_percent(1, 200001), "0.000%");   // just below half
  EXPECT_EQ(render_percent(0, 10), "0.000%");
  EXPECT_EQ(render_percent(10, 10), "100.000%");
  EXPECT_EQ(render_percent(1, 3), "33.333%");
  EXPECT_EQ(render_percent(2, 3), "66.667%");
  EXPECT_THROW(render_percent(1, 0), InvalidInput);
}

TEST(Extrapolate, FloorsExactly) {
  EXPECT_EQ(extrapolate(54, 40199195, 254275), 8537u);
  EXPECT_EQ(extrapolate(113, 40199195, 254275), 17864u);
  EXPECT_EQ(extrapolate(1, 3, 2), 1u);
  EXPECT_EQ(extrapolate(~0ull >> 1, 4, 2), (~0ull >> 1) * 2);  // no intermediate overflow
}

TEST(PrevalenceReport, FieldsAndValidation) {
  ConsensusCounts c{300, 280, 54, 113};
  TweetTallies t{120, 400, 10000};
  const auto r = prevalence_report(c, 254275, 0.62, 40199195, t);
  EXPECT_EQ(r.lower_percent, "0.021%");
  EXPECT_DOUBLE_EQ(r.lower_rate, 54.0 / 254275);
  EXPECT_EQ(*r.kappa, 0.62);
  EXPECT_DOUBLE_EQ(*r.tweet_lower_rate, 0.012);
  EXPECT_DOUBLE_EQ(*r.tweet_upper_rate, 0.04);
  const auto j = to_json(r);
  EXPECT_EQ(j["extrapolated_low"], 8537);
  EXPECT_EQ(j["upper_percent"], "0.044%");

  EXPECT_THROW(prevalence_report(c, 0), InvalidInput);
  EXPECT_THROW(prevalence_report(ConsensusCounts{10, 10, 5, 4}, 100), InvalidInput);
  EXPECT_THROW(prevalence_report(ConsensusCounts{10, 10, 5, 40}, 20), InvalidInput);
}

TEST(ConsensusCountsIo, ValidatesOrdering) {
  EXPECT_EQ(consensus_counts_from_json({{"strict", 54}, {"loose", 113}}).loose, 113u);
  EXPECT_THROW(consensus_counts_from_json({{"strict", 60}, {"loose", 50}}), InvalidInput);
}

TEST(Kappa, TwoByTwoConfusionMatrix) {
  // [[20, 5], [5, 70]]: p_o = 0.9, p_e = 0.625.
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < 20; ++i) pairs.emplace_back(1, 1);
  for (int i = 0; i < 5; ++i) pairs.emplace_back(1, 2);
  for (int i = 0; i < 5; ++i) pairs.emplace_back(2, 1);
  for (int i = 0; i < 70; ++i) pairs.emplace_back(2, 2);
  EXPECT_NEAR(cohen_kappa(pairs), 0.275 / 0.375, 1e-12);
}

TEST(Kappa, InvariantUnderCategoryRelabeling) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> cat(1, 3);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::pair<int, int>> p, q;
    for (int i = 0; i < 30; ++i) {
      const int a = cat(rng), b = (i % 2) ? a : cat(rng);
      p.emplace_back(a, b);
      // 1 -> 3, 2 -> 1, 3 -> 2
      auto perm = [](int c) { return c == 1 ? 3 : c == 2 ? 1 : 2; };
      q.emplace_back(perm(a), perm(b));
    }
    const double k = cohen_kappa(p);
    EXPECT_NEAR(k, cohen_kappa(q), 1e-12);
    EXPECT_GE(k, -1.0);
    EXPECT_LE(k, 1.0);
  }
}

TEST(PrevalenceReport, ZeroCounts) {
  const auto r = prevalence_report(ConsensusCounts{}, 1234, std::nullopt, 40199195);
  EXPECT_EQ(r.lower_rate, 0.0);
  EXPECT_EQ(r.upper_rate, 0.0);
  EXPECT_EQ(*r.extrapolated_low, 0u);
  EXPECT_EQ(*r.extrapolated_high, 0u);
}
