#include <gtest/gtest.h>

#include <random>

#include "ganeye/error.hpp"
#include "ganeye/stats.hpp"
#include "support/oracles.hpp"

using namespace ganeye;
using namespace ganeye::stats;

TEST(Describe, MatchesTwoPass) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(1e6, 3.0);  // large offset stresses cancellation
  std::vector<double> v(1000);
  for (auto& x : v) x = n(rng);
  long double mean = 0;
  for (double x : v) mean += x;
  mean /= v.size();
  long double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const auto d = describe(v);
  EXPECT_EQ(d.n, 1000u);
  EXPECT_NEAR(d.mean, static_cast<double>(mean), 1e-8);
  EXPECT_NEAR(*d.sd, std::sqrt(static_cast<double>(ss / 999)), 1e-9);
}

TEST(Describe, SingleValueHasNoSd) {
  const std::vector<double> v{4.0};
  const auto d = describe(v);
  EXPECT_EQ(d.mean, 4.0);
  EXPECT_FALSE(d.sd);
  EXPECT_THROW(describe(std::vector<double>{}), InvalidInput);
}

TEST(Ks, IdenticalSamplesGiveZero) {
  const std::vector<double> a{1, 2, 3, 3, 5};
  EXPECT_EQ(ks_two_sample(a, a), 0.0);
  EXPECT_EQ(ks_pvalue(0.0, 5, 5), 1.0);
}

TEST(Ks, DisjointSamplesGiveOne) {
  const std::vector<double> a{1, 2, 3}, b{4, 5};
  EXPECT_EQ(ks_two_sample(a, b), 1.0);
  EXPECT_EQ(ks_two_sample(b, a), 1.0);
}

TEST(Ks, MatchesExhaustiveOracleWithTies) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> size(1, 30), val(0, 5);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> a(size(rng)), b(size(rng));
    for (auto& v : a) v = val(rng);
    for (auto& v : b) v = val(rng) * 0.5;
    EXPECT_EQ(ks_two_sample(a, b), oracle::ks_exhaustive(a, b));
    EXPECT_EQ(ks_two_sample(a, b), ks_two_sample(b, a));
  }
}

TEST(Ks, PvalueDecreasesWithD) {
  double prev = 1.0;
  for (double d = 0.05; d <= 1.0; d += 0.05) {
    const double p = ks_pvalue(d, 50, 60);
    EXPECT_LE(p, prev);
    EXPECT_GE(p, 0.0);
    prev = p;
  }
}

TEST(Ks, PvalueAgainstPermutationAtModerateD) {
  // Samples with distinct values; D lands in the region where the asymptotic
  // and permutation p-values are both well away from 0 and 1.
  std::vector<double> a, b;
  for (int i = 0; i < 80; ++i) a.push_back(i);
  for (int i = 0; i < 80; ++i) b.push_back(i + 12.5);
  const double d = ks_two_sample(a, b);
  const double p = ks_pvalue(d, a.size(), b.size());
  const double perm = oracle::ks_permutation_pvalue(a, b, 20000, 5);
  EXPECT_GT(p, 0.2);
  EXPECT_NEAR(p, perm, 0.06);
}

TEST(Ks, RejectsBadArguments) {
  EXPECT_THROW(ks_two_sample(std::vector<double>{}, std::vector<double>{1}), InvalidInput);
  EXPECT_THROW(ks_pvalue(1.5, 3, 3), InvalidInput);
  EXPECT_THROW(ks_pvalue(0.5, 0, 3), InvalidInput);
}

TEST(Histogram, HalfOpenBinsClosedLastEdge) {
  const std::vector<double> edges{0.0, 0.01, 0.02, 0.05};
  const std::vector<double> v{0.0, 0.0099, 0.01, 0.02, 0.05, 0.051, -0.1, std::nan("")};
  const auto h = histogram(v, edges);
  EXPECT_EQ(h.counts, (std::vector<std::size_t>{2, 1, 2}));
  EXPECT_EQ(h.overflow, 3u);
  EXPECT_THROW(histogram(v, std::vector<double>{0.0, 0.0}), InvalidInput);
}

TEST(Silverman, UsesSmallerSpread) {
  // Heavy tails: IQR/1.34 < sd.
  std::vector<double> v{-100, -1, -0.5, 0, 0.5, 1, 100};
  const auto d = describe(v);
  std::vector<double> s = v;
  std::ranges::sort(s);
  const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  EXPECT_NEAR(silverman_bandwidth(v), 0.9 * std::min(*d.sd, iqr / 1.34) * std::pow(7.0, -0.2), 1e-12);
}

TEST(Silverman, ZeroIqrFallsBackToSd) {
  std::vector<double> v(20, 1.0);
  v.push_back(5.0);
  const double h = silverman_bandwidth(v);
  EXPECT_NEAR(h, 0.9 * *describe(v).sd * std::pow(21.0, -0.2), 1e-12);
  EXPECT_THROW(silverman_bandwidth(std::vector<double>(5, 2.0)), InvalidInput);
}

TEST(Kde1d, IntegratesToOne) {
  std::mt19937_64 rng(17);
  std::exponential_distribution<double> e(3.0);
  std::vector<double> v(300);
  for (auto& x : v) x = e(rng);
  const double h = silverman_bandwidth(v);
  const auto [mn, mx] = std::ranges::minmax(v);
  const auto grid = linspace(mn - 6 * h, mx + 6 * h, 3000);
  EXPECT_NEAR(oracle::trapezoid(grid, kde_1d(v, grid).values), 1.0, 0.01);
}

TEST(Kde1d, ExplicitBandwidthSinglePoint) {
  const std::vector<double> v{0.0};
  const std::vector<double> grid{-1.0, 0.0, 1.0};
  const auto d = kde_1d(v, grid, 1.0);
  EXPECT_NEAR(d.values[1], 1.0 / std::sqrt(2 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(d.values[0], d.values[2], 1e-15);
  EXPECT_THROW(kde_1d(v, grid), InvalidInput);  // no automatic bandwidth for n = 1
  EXPECT_THROW(kde_1d(v, grid, 0.0), InvalidInput);
  EXPECT_THROW(kde_1d(v, std::vector<double>{1.0, 0.0}, 1.0), InvalidInput);
}

TEST(Kde2d, MatchesDirectProductKernel) {
  const std::vector<NormPoint> pts{{0.2, 0.3}, {0.25, 0.35}, {0.7, 0.6}};
  const auto xs = linspace(0.0, 1.0, 11);
  const auto ys = linspace(0.0, 1.0, 7);
  const auto d = kde_2d(pts, xs, ys, std::pair{0.1, 0.2});
  for (std::size_t iy = 0; iy < ys.size(); ++iy) {
    for (std::size_t ix = 0; ix < xs.size(); ++ix) {
      double want = 0;
      for (const auto& p : pts) {
        const double ux = (xs[ix] - p.x) / 0.1, uy = (ys[iy] - p.y) / 0.2;
        want += std::exp(-0.5 * (ux * ux + uy * uy)) / (2 * std::numbers::pi * 0.1 * 0.2);
      }
      EXPECT_NEAR(d.at(ix, iy), want / 3.0, 1e-12);
    }
  }
}

TEST(Kde2d, ScottBandwidthAndMass) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n(0.0, 0.05);
  std::vector<NormPoint> pts(150);
  std::vector<double> px;
  for (auto& p : pts) {
    p = {0.5 + n(rng), 0.5 + n(rng)};
    px.push_back(p.x);
  }
  const auto axis = linspace(0.0, 1.0, 201);
  const auto d = kde_2d(pts, axis, axis);
  EXPECT_NEAR(d.bandwidth_x, *describe(px).sd * std::pow(150.0, -1.0 / 6.0), 1e-15);
  EXPECT_NEAR(oracle::trapezoid_2d(axis, axis, d.values), 1.0, 0.01);
}

TEST(Kde2d, ZeroSpreadNeedsExplicitBandwidth) {
  const std::vector<NormPoint> pts{{0.5, 0.5}, {0.5, 0.5}};
  const auto axis = linspace(0.0, 1.0, 5);
  EXPECT_THROW(kde_2d(pts, axis, axis), InvalidInput);
  EXPECT_NO_THROW(kde_2d(pts, axis, axis, std::pair{0.1, 0.1}));
}

TEST(Linspace, Endpoints) {
  const auto g = linspace(-1.0, 2.0, 4);
  EXPECT_EQ(g, (std::vector<double>{-1.0, 0.0, 1.0, 2.0}));
  EXPECT_THROW(linspace(0, 1, 1), InvalidInput);
}
