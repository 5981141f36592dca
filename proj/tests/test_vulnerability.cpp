#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "robustprice/errors.hpp"
#include "robustprice/kmeans.hpp"
#include "robustprice/random.hpp"
#include "robustprice/robust.hpp"
#include "robustprice/vulnerability.hpp"

using namespace robustprice;

namespace {

// Two clusters on a 2-slot horizon. Cluster 1 (evening) is cheaper.
struct TwoClusters {
  std::vector<NormalizedProfile> profiles{
      {"a", {0.8, 0.2}}, {"b", {0.7, 0.3}}, {"c", {0.2, 0.8}}, {"d", {0.3, 0.7}}};
  PriceCurve prices{std::vector<double>{40.0, 10.0}};
  Clustering clustering = clustering_from_assignment(profiles, {0, 0, 1, 1}, 2, prices);
};

Clustering heterogeneous_baseline(std::vector<NormalizedProfile>& profiles, PriceCurve& prices,
                                  std::size_t n, std::uint64_t seed) {
  const auto pop = generate_corpus(CorpusSpec::residential(n, seed));
  profiles = normalize_all(pop);
  prices = price_curve(CostModel{}, scale_to_peak(aggregate(pop), 1.1e6));
  KMeansOptions o;
  o.k = 12;
  o.seed = seed;
  o.metric = Metric::kL1;
  return kmeans_profiles(profiles, prices, o);
}

}  // namespace

TEST(DisguisedProfile, HandExamples) {
  const NormalizedProfile d{"u", {1.0, 0.0}};
  const std::vector<double> c{0.0, 1.0};
  EXPECT_EQ(disguised_profile(d, c, 0.0).weights, d.weights);
  EXPECT_EQ(disguised_profile(d, c, 1.0).weights, c);
  const auto m = disguised_profile(d, c, 0.3);
  EXPECT_DOUBLE_EQ(m.weights[0], 0.7);
  EXPECT_DOUBLE_EQ(m.weights[1], 0.3);
}

TEST(DisguisedProfile, StaysOnSimplex) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const NormalizedProfile d{"u", oracle::random_simplex(rng, 24)};
    const auto c = oracle::random_simplex(rng, 24);
    const auto m = disguised_profile(d, c, rng.uniform());
    double s = 0.0;
    for (double v : m.weights) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(MinSwitchEffort, UserAtOwnCenterNeedsExactlyHalf) {
  Rng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const auto own = oracle::random_simplex(rng, 24);
    const auto target = oracle::random_simplex(rng, 24);
    EXPECT_EQ(min_switch_effort(own, own, target), 0.5);
  }
}

TEST(MinSwitchEffort, UserAtTargetNeedsNothing) {
  Rng rng(23);
  const auto own = oracle::random_simplex(rng, 24);
  const auto target = oracle::random_simplex(rng, 24);
  EXPECT_EQ(min_switch_effort(target, own, target), 0.0);
}

TEST(MinSwitchEffort, DegenerateCenters) {
  const std::vector<double> c{0.5, 0.5};
  EXPECT_THROW(min_switch_effort(std::vector<double>{1.0, 0.0}, c, c), DegenerateCenters);
}

TEST(MinSwitchEffort, MatchesGridOracleAndIsOneSidedOptimal) {
  Rng rng(24);
  for (int trial = 0; trial < 60; ++trial) {
    const auto d = oracle::random_simplex(rng, 24);
    const auto own = oracle::random_simplex(rng, 24);
    const auto target = oracle::random_simplex(rng, 24);
    const double mu = min_switch_effort(d, own, target);
    EXPECT_NEAR(mu, oracle::grid_effort(d, own, target), 1e-5);
    EXPECT_GE(oracle::margin(d, own, target, mu), -1e-12);
    EXPECT_NEAR(switch_margin(d, own, target, mu), oracle::margin(d, own, target, mu), 1e-12);
    for (double below = mu - 1e-3; below > 0.0; below -= 0.05) {
      EXPECT_LT(oracle::margin(d, own, target, below), 0.0);
    }
  }
}

TEST(Cr, CheapestClusterHasNoTarget) {
  TwoClusters s;
  const auto r = cr(2, s.clustering, s.profiles, 0.2);
  EXPECT_EQ(r.own_cluster, 1u);
  EXPECT_TRUE(std::isinf(r.cr));
  EXPECT_FALSE(r.best_target.has_value());
  EXPECT_EQ(r.benefit, 0.0);
}

TEST(Cr, UserAtOwnCenterWithCheaperCluster) {
  std::vector<NormalizedProfile> profiles{{"a", {0.8, 0.2}}, {"b", {0.2, 0.8}}};
  const PriceCurve prices(std::vector<double>{40.0, 10.0});
  const auto c = clustering_from_assignment(profiles, {0, 1}, 2, prices);
  const auto r = cr(0, c, profiles, 0.5);
  EXPECT_EQ(r.cr, 0.5);
  ASSERT_TRUE(r.best_target.has_value());
  EXPECT_EQ(*r.best_target, 1u);
  EXPECT_DOUBLE_EQ(r.benefit, c.prices[0] - c.prices[1]);
  EXPECT_EQ(cr(0, c, profiles, 0.49).benefit, 0.0);
}

TEST(Cr, MatchesPerTargetGridOracle) {
  std::vector<NormalizedProfile> profiles;
  PriceCurve prices;
  const auto base = heterogeneous_baseline(profiles, prices, 200, 31);
  const auto reports = disguise_reports(base, profiles, 0.2);
  std::vector<std::vector<double>> centers = base.centers;
  for (std::size_t i = 0; i < profiles.size(); i += 5) {
    const auto& r = reports[i];
    const std::size_t own = base.assignments[i];
    double best = kNoDisguise;
    for (std::size_t n = 0; n < base.k; ++n) {
      if (n == own || !(base.prices[n] < base.prices[own])) {
        EXPECT_EQ(r.mu_per_target.count(n), 0u);
        continue;
      }
      const double g = oracle::grid_effort(profiles[i].weights, centers[own], centers[n]);
      ASSERT_EQ(r.mu_per_target.count(n), 1u);
      EXPECT_NEAR(r.mu_per_target.at(n), g, 1e-5);
      best = std::min(best, r.mu_per_target.at(n));
    }
    EXPECT_EQ(r.cr, best);
    EXPECT_GE(r.benefit, 0.0);
  }
}

TEST(CountDisguisers, PlantedUsersAtOwnCenter) {
  // Three users sit exactly at their cluster's center; a cheaper cluster
  // exists, so each needs effort exactly 0.5.
  std::vector<NormalizedProfile> profiles{
      {"a", {0.8, 0.2}}, {"b", {0.8, 0.2}}, {"c", {0.8, 0.2}}, {"d", {0.1, 0.9}}};
  const PriceCurve prices(std::vector<double>{40.0, 10.0});
  const auto c = clustering_from_assignment(profiles, {0, 0, 0, 1}, 2, prices);
  EXPECT_EQ(count_disguisers(c, profiles, 0.5).total, 3u);
  EXPECT_EQ(count_disguisers(c, profiles, 0.4999).total, 0u);
  EXPECT_EQ(count_disguisers(c, profiles, 0.5).per_cluster[0], 3u);
}

TEST(CountDisguisers, ZeroAtZeroThetaAndMonotone) {
  std::vector<NormalizedProfile> profiles;
  PriceCurve prices;
  const auto base = heterogeneous_baseline(profiles, prices, 1500, 32);
  const auto reports = disguise_reports(base, profiles, 0.2);
  EXPECT_EQ(count_disguisers(base, reports, 0.0).total, 0u);
  std::vector<std::size_t> prev(base.k, 0);
  for (double theta = 0.0; theta <= 0.2 + 1e-12; theta += 0.005) {
    const auto counts = count_disguisers(base, reports, theta);
    std::size_t sum = 0;
    std::size_t direct = 0;
    for (std::size_t j = 0; j < base.k; ++j) {
      EXPECT_GE(counts.per_cluster[j], prev[j]);
      sum += counts.per_cluster[j];
    }
    for (const auto& r : reports) direct += r.cr <= theta ? 1 : 0;
    EXPECT_EQ(sum, counts.total);
    EXPECT_EQ(direct, counts.total);
    prev = counts.per_cluster;
  }
}

TEST(Smoothness, EqualPricesGiveZeroDelta) {
  TwoClusters s;
  auto c = s.clustering;
  c.prices = {20.0, 20.0};
  EXPECT_EQ(measure_smoothness(c, s.profiles, 0.5).delta_observed, 0.0);
}

TEST(Smoothness, BoundFormula) {
  EXPECT_DOUBLE_EQ(smoothness_bound(0.5, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(smoothness_bound(0.5, 0.5), 1.5);
  EXPECT_THROW(smoothness_bound(0.5, 1.0), ValidationError);
}

TEST(Smoothness, GkcRespectsBoundWhileProfileClusteringDoesNot) {
  std::vector<NormalizedProfile> profiles;
  PriceCurve prices;
  const auto base = heterogeneous_baseline(profiles, prices, 3000, 33);
  std::vector<double> mci;
  for (const auto& p : profiles) mci.push_back(weighted_price(prices, p.weights));
  const double rho = 0.5;
  const auto rc = gkc(MciTable::from_values(mci), rho);
  const auto view = to_clustering(rc, profiles, prices);
  for (double theta : {0.05, 0.1, 0.2, 0.5, 0.9}) {
    const double bound = smoothness_bound(rho, theta);
    const auto r = measure_smoothness(view, profiles, theta, PriceSwitch{rho, mci}, bound);
    EXPECT_LE(r.delta_observed, bound);
    EXPECT_TRUE(r.violations.empty());
  }
  const auto loose = measure_smoothness(base, profiles, 0.05);
  EXPECT_GT(loose.delta_observed, smoothness_bound(rho, 0.05));
}

TEST(PriceSwitch, EffortMatchesClosedForm) {
  // MCI 30 in a cluster priced 30, target priced 25, rho 1:
  // need (1 - mu) * 5 <= 1, so mu = 0.8.
  std::vector<NormalizedProfile> profiles{{"a", {0.5, 0.5}}, {"b", {0.9, 0.1}}};
  const PriceCurve prices(std::vector<double>{10.0, 50.0});
  const auto c = clustering_from_assignment(profiles, {0, 1}, 2, prices, {25.0, 30.0});
  const auto r = cr(1, c, profiles, 0.9, PriceSwitch{1.0, {25.0, 30.0}});
  EXPECT_NEAR(r.cr, 0.8, 1e-12);
}
