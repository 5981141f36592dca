#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "robustprice/errors.hpp"
#include "robustprice/kmeans.hpp"
#include "robustprice/random.hpp"
#include "robustprice/robust.hpp"

using namespace robustprice;

namespace {

std::vector<double> random_mci(Rng& rng, std::size_t n, bool ties) {
  std::vector<double> v(n);
  for (auto& x : v) {
    x = 20.0 * rng.uniform();
    if (ties) x = std::round(x * 2.0) / 2.0;
  }
  return v;
}

// A base clustering of n users into k groups by index.
Clustering base_by_index(std::size_t n, std::size_t k) {
  std::vector<NormalizedProfile> profiles;
  std::vector<std::size_t> assignment;
  for (std::size_t i = 0; i < n; ++i) {
    profiles.push_back({"u" + std::to_string(i), {1.0}});
    assignment.push_back(i % k);
  }
  return clustering_from_assignment(profiles, assignment, k, PriceCurve({1.0}));
}

}  // namespace

TEST(MciTable, SortedWithIdTieBreak) {
  const MciTable single({"x"}, {3.0});
  EXPECT_EQ(single.size(), 1u);
  const MciTable t({"b", "a", "c"}, {2.0, 2.0, 1.0});
  EXPECT_EQ(t.user_id(t[0].user), "c");
  EXPECT_EQ(t.user_id(t[1].user), "a");
  EXPECT_EQ(t.user_id(t[2].user), "b");
  EXPECT_THROW(MciTable({"a", "a"}, {1.0, 2.0}), ValidationError);
  EXPECT_THROW(MciTable({"a"}, {std::nan("")}), ValidationError);
}

TEST(MciTable, LargeRandomTableIsSorted) {
  Rng rng(41);
  for (bool ties : {false, true}) {
    const auto values = random_mci(rng, 1000, ties);
    const auto t = MciTable::from_values(values);
    for (std::size_t r = 1; r < t.size(); ++r) {
      ASSERT_LE(t[r - 1].mci, t[r].mci);
      if (t[r - 1].mci == t[r].mci) {
        ASSERT_LT(t[r - 1].user, t[r].user);
      }
    }
    for (std::size_t r = 0; r < t.size(); ++r) ASSERT_EQ(values[t[r].user], t[r].mci);
  }
}

TEST(MciTable, MatchesFullSortOnSkewedInputs) {
  Rng rng(43);
  for (std::size_t n : {std::size_t{37}, std::size_t{5000}, std::size_t{200000}}) {
    std::vector<double> values(n);
    for (auto& v : values) {
      const double u = rng.uniform();
      if (u < 0.3) {
        v = std::round(rng.uniform() * 20.0) / 4.0;  // heavy ties
      } else if (u < 0.35) {
        v = (rng.uniform() < 0.5 ? -0.0 : 0.0);
      } else if (u < 0.4) {
        v = -1e6 * rng.uniform();
      } else if (u < 0.45) {
        v = std::ldexp(rng.uniform(), -900);
      } else {
        v = 50.0 + 1e-9 * rng.uniform();  // one narrow dense range
      }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return values[a] < values[b] || (values[a] == values[b] && a < b);
    });
    const auto t = MciTable::from_values(values);
    ASSERT_EQ(t.size(), n);
    for (std::size_t r = 0; r < n; ++r) ASSERT_EQ(t[r].user, order[r]) << "n=" << n << " rank " << r;
    EXPECT_EQ(t.user_mci(), values);
  }
  EXPECT_THROW(MciTable::from_values(std::vector<double>{1.0, INFINITY}), ValidationError);
  EXPECT_THROW(MciTable::from_values(std::vector<double>{std::nan("")}), ValidationError);
}

TEST(MciTable, HandlesSignedZeroAndNegatives) {
  const auto t = MciTable::from_values(std::vector<double>{0.0, -5.0, -0.0, 3.0, -1e-300});
  EXPECT_EQ(t[0].user, 1u);
  EXPECT_EQ(t[1].user, 4u);
  EXPECT_EQ(t[2].user, 0u);
  EXPECT_EQ(t[3].user, 2u);
  EXPECT_EQ(t[4].user, 3u);
}

TEST(MciTable, FromPopulation) {
  const Population pop({{"b", {1.0, 1.0}}, {"a", {0.0, 2.0}}});
  const auto t = mci_table(pop, PriceCurve({10.0, 20.0}));
  EXPECT_EQ(t.user_id(t[0].user), "b");
  EXPECT_DOUBLE_EQ(t[0].mci, 15.0);
  EXPECT_DOUBLE_EQ(t[1].mci, 20.0);
  EXPECT_THROW(mci_table(Population{}, PriceCurve({1.0})), EmptyPopulation);
}

TEST(Gkc, HandTrace) {
  const auto t = MciTable::from_values(std::vector<double>{1.0, 1.5, 2.1, 4.0});
  const auto rc = gkc(t, 0.5);
  ASSERT_EQ(rc.size(), 3u);
  EXPECT_EQ(rc.clusters[0].members, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(rc.clusters[1].members, (std::vector<std::size_t>{2}));
  EXPECT_EQ(rc.clusters[2].members, (std::vector<std::size_t>{3}));
  EXPECT_DOUBLE_EQ(rc.clusters[0].price, 1.25);
  EXPECT_DOUBLE_EQ(rc.clusters[1].price, 2.1);
  EXPECT_DOUBLE_EQ(rc.clusters[2].price, 4.0);
  EXPECT_EQ(rc.assignment, (std::vector<std::size_t>{0, 0, 1, 2}));
  EXPECT_EQ(minimal_clusters_oracle(t, 0.5), 3u);
}

TEST(Gkc, DegenerateCases) {
  const auto equal = MciTable::from_values(std::vector<double>(10, 7.5));
  const auto one = gkc(equal, 0.1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one.clusters[0].price, 7.5);
  EXPECT_EQ(minimal_clusters_oracle(equal, 0.1), 1u);

  const auto spread = MciTable::from_values(std::vector<double>{3.0, 9.0, 5.0});
  EXPECT_EQ(gkc(spread, 3.0).size(), 1u);
  EXPECT_EQ(gkc(spread, 2.9).size(), 2u);

  EXPECT_THROW(gkc(spread, 0.0), ValidationError);
  EXPECT_THROW(gkc(MciTable{}, 1.0), ValidationError);
}

TEST(Gkc, ClustersAreContiguousExhaustiveAndKeepTiesTogether) {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const auto values = random_mci(rng, 1 + rng.index(400), trial % 2 == 0);
    const auto t = MciTable::from_values(values);
    const auto rc = gkc(t, 0.05 + rng.uniform());
    std::size_t rank = 0;
    for (std::size_t c = 0; c < rc.size(); ++c) {
      for (std::size_t u : rc.clusters[c].members) {
        ASSERT_EQ(u, t[rank++].user);
        ASSERT_EQ(rc.assignment[u], c);
      }
      if (c > 0) {
        ASSERT_LT(rc.clusters[c - 1].max_mci, rc.clusters[c].min_mci);
      }
    }
    ASSERT_EQ(rank, values.size());
  }
}

TEST(Gkc, MatchesDynamicProgramAndExhaustivePartitionSearch) {
  Rng rng(43);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.index(8);
    const auto values = random_mci(rng, n, trial % 3 == 0);
    const double rho = 0.1 + 3.0 * rng.uniform();
    const auto t = MciTable::from_values(values);
    const std::size_t exhaustive = oracle::min_blocks_exhaustive(values, rho);
    ASSERT_EQ(gkc(t, rho).size(), exhaustive);
    ASSERT_EQ(minimal_clusters_oracle(t, rho), exhaustive);
  }
  for (int trial = 0; trial < 200; ++trial) {
    const auto values = random_mci(rng, 1 + rng.index(500), trial % 2 == 0);
    const double rho = 0.05 + 2.0 * rng.uniform();
    const auto t = MciTable::from_values(values);
    ASSERT_EQ(gkc(t, rho).size(), minimal_clusters_oracle(t, rho));
  }
}

TEST(Gkc, CountNonIncreasingInRho) {
  Rng rng(44);
  const auto t = MciTable::from_values(random_mci(rng, 2000, false));
  std::size_t prev = t.size() + 1;
  for (double rho = 0.01; rho < 12.0; rho *= 1.3) {
    const std::size_t k = gkc(t, rho).size();
    EXPECT_LE(k, prev);
    prev = k;
  }
  EXPECT_EQ(prev, 1u);
}

TEST(Oracle, CapIsEnforced) {
  const auto t = MciTable::from_values(std::vector<double>(11, 1.0));
  EXPECT_THROW(minimal_clusters_oracle(t, 1.0, 10), InstanceTooLarge);
}

TEST(Skc, NarrowBaseClusterIsKept) {
  const std::vector<double> mci{1.0, 1.3, 1.9};
  const auto rc = skc(mci, 0.5, base_by_index(3, 1));
  ASSERT_EQ(rc.size(), 1u);
  EXPECT_DOUBLE_EQ(rc.clusters[0].price, 1.45);
}

TEST(Skc, WideBaseClusterIsSplit) {
  const std::vector<double> mci{0.0, 10.0};
  const auto rc = skc(mci, 1.0, base_by_index(2, 1));
  ASSERT_EQ(rc.size(), 2u);
  EXPECT_EQ(rc.clusters[0].members, (std::vector<std::size_t>{0}));
  EXPECT_EQ(rc.clusters[1].members, (std::vector<std::size_t>{1}));
}

TEST(Skc, RangeExactlyTwoRhoIsSplitAndMidpointTieGoesLow) {
  const std::vector<double> mci{0.0, 0.5, 1.0};
  const auto rc = skc(mci, 0.5, base_by_index(3, 1));
  ASSERT_EQ(rc.size(), 2u);
  EXPECT_EQ(rc.clusters[0].members, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(rc.clusters[1].members, (std::vector<std::size_t>{2}));
}

TEST(Skc, NeverUsesFewerClustersThanGkcAndPassesCriterion) {
  Rng rng(45);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 50 + rng.index(500);
    const auto values = random_mci(rng, n, trial % 2 == 0);
    const double rho = 0.1 + rng.uniform();
    const auto t = MciTable::from_values(values);
    const auto base = base_by_index(n, 1 + rng.index(10));
    const auto s = skc(values, rho, base);
    const auto g = gkc(t, rho);
    EXPECT_GE(s.size(), g.size());
    for (const auto* rc : {&s, &g}) {
      const auto check = criterion_check(*rc, t, rho);
      EXPECT_TRUE(check.passed);
      EXPECT_LE(check.worst_gap, rho + 1e-12);
    }
    std::vector<std::size_t> seen(n, 0);
    for (const auto& c : s.clusters) {
      for (std::size_t u : c.members) ++seen[u];
      EXPECT_LE(c.max_mci - c.min_mci, 2.0 * rho);
    }
    for (std::size_t k : seen) EXPECT_EQ(k, 1u);
  }
}

TEST(Skc, RejectsMismatchedInput) {
  EXPECT_THROW(skc(std::vector<double>{1.0}, 0.5, base_by_index(2, 1)), ValidationError);
}

TEST(CriterionCheck, DetectsMinPricedFullWidthCluster) {
  const auto t = MciTable::from_values(std::vector<double>{1.0, 2.0});
  auto rc = gkc(t, 0.5);
  ASSERT_EQ(rc.size(), 1u);
  EXPECT_TRUE(criterion_check(rc, t, 0.5).passed);
  rc.clusters[0].price = rc.clusters[0].min_mci;
  const auto check = criterion_check(rc, t, 0.5);
  EXPECT_FALSE(check.passed);
  EXPECT_DOUBLE_EQ(check.worst_gap, 1.0);
  EXPECT_EQ(check.worst_user, 1u);
}

TEST(ToClustering, CarriesRobustPrices) {
  std::vector<NormalizedProfile> profiles{{"a", {1.0, 0.0}}, {"b", {0.0, 1.0}}};
  const PriceCurve prices({10.0, 20.0});
  const auto t = MciTable::from_values(std::vector<double>{10.0, 20.0});
  const auto rc = gkc(t, 1.0);
  const auto view = to_clustering(rc, profiles, prices);
  EXPECT_EQ(view.k, 2u);
  EXPECT_EQ(view.prices, rc.prices());
  EXPECT_EQ(view.centers[1], profiles[1].weights);
}
