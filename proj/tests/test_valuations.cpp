#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "nswxos/exact_oracles.hpp"
#include "nswxos/valuation.hpp"

using namespace nswxos;

namespace {

XosValuation family(std::vector<std::vector<double>> rows) {
  std::vector<AdditiveFunction> fs;
  for (auto& r : rows) fs.emplace_back(std::move(r));
  return XosValuation(std::move(fs));
}

double exhaustive_value(const XosValuation& v, const Bundle& s) {
  double best = 0.0;
  for (const auto& f : v.family()) {
    double sum = 0.0;
    for (Good g : s) sum += f(g);
    best = std::max(best, sum);
  }
  return best;
}

XosValuation random_xos(SplitMix64& rng, std::size_t m, std::size_t k) {
  std::vector<std::vector<double>> rows(k, std::vector<double>(m));
  for (auto& r : rows) {
    for (double& w : r) w = rng.coin() ? rng.uniform01() : 0.0;
  }
  return family(rows);
}

}  // namespace

TEST(Valuation, ValueExamples) {
  EXPECT_DOUBLE_EQ(family({{2, 0}, {0, 3}}).value(Bundle{0, 1}), 3.0);
  EXPECT_DOUBLE_EQ(family({{2, 0}, {0, 3}}).value(Bundle{}), 0.0);
  EXPECT_DOUBLE_EQ(family({{1, 1, 0}, {0, 0, 3}}).value(Bundle{0, 2}), 3.0);
}

TEST(Valuation, ValueRejectsOutOfRangeGood) {
  EXPECT_THROW(family({{1, 1}}).value(Bundle{2}), std::out_of_range);
}

TEST(Valuation, ConstructionRejectsBadInput) {
  EXPECT_THROW(AdditiveFunction({1.0, -0.5}), std::invalid_argument);
  EXPECT_THROW(AdditiveFunction({std::numeric_limits<double>::infinity()}), std::invalid_argument);
  EXPECT_THROW(AdditiveFunction({std::nan("")}), std::invalid_argument);
  EXPECT_THROW(XosValuation(std::vector<AdditiveFunction>{}), std::invalid_argument);
  EXPECT_THROW(family({{1, 1}, {1}}), std::invalid_argument);
  EXPECT_THROW(Instance(2, {}), std::invalid_argument);
  EXPECT_THROW(Instance(3, {XosValuation::additive({1, 2})}), std::invalid_argument);
  EXPECT_THROW(PriceVector({-1.0}), std::invalid_argument);
}

TEST(Valuation, XosQueryExamples) {
  const auto a = family({{2, 0}, {0, 3}});
  EXPECT_EQ(a.argmax(Bundle{1}), 1u);
  EXPECT_EQ(&xos_query(a, Bundle{1}), &a.family()[1]);
  EXPECT_EQ(family({{1, 0}, {0, 1}}).argmax(Bundle{0, 1}), 0u);
  EXPECT_EQ(family({{1, 1, 0}, {0, 0, 3}}).argmax(Bundle{0, 1}), 0u);
}

TEST(Valuation, DemandExamples) {
  EXPECT_EQ(demand_query(family({{3, 1}}), PriceVector({0, 0})), (Bundle{0, 1}));
  EXPECT_EQ(demand_query(family({{3, 1}}), PriceVector({1, 2})), (Bundle{0}));
  EXPECT_EQ(demand_query(family({{2, 2, 0}, {0, 0, 5}}), PriceVector({1, 1, 1})), (Bundle{2}));
}

TEST(Valuation, DemandSkipsZeroSurplusAndInfinitePrices) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(demand_query(family({{1, 2, 3}}), PriceVector({1, inf, 0})), (Bundle{2}));
  EXPECT_EQ(demand_query(family({{1, 1}}), PriceVector({5, 5})), Bundle{});
}

TEST(Valuation, CappedValueExamples) {
  const auto v = XosValuation::additive({3.0});
  EXPECT_DOUBLE_EQ(CappedView(v, 1.0, 4)(Bundle{0}), 0.5);
  EXPECT_DOUBLE_EQ(CappedView(v, 0.1, 4)(Bundle{0}), 0.3);
  EXPECT_DOUBLE_EQ(capped_value(CappedView(v, 0.1, 4), Bundle{}), 0.0);
  EXPECT_THROW(CappedView(v, 0.0, 4), std::invalid_argument);
}

TEST(Valuation, RandomPropertiesAgainstEnumeration) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng.below(8);
    const auto v = random_xos(rng, m, 1 + rng.below(4));
    const std::size_t full = std::size_t{1} << m;
    for (std::size_t s = 0; s < full; ++s) {
      const Bundle bs = detail::bundle_of_mask(s);
      const double vs = v.value(bs);
      ASSERT_NEAR(vs, exhaustive_value(v, bs), 1e-12);
      const auto& f = xos_query(v, bs);
      for (std::size_t t = 0; t < full; ++t) {
        const Bundle bt = detail::bundle_of_mask(t);
        ASSERT_LE(f.value(bt), v.value(bt) + 1e-12);
        ASSERT_LE(v.value(unite(bs, bt)), vs + v.value(bt) + 1e-12);
        if ((s & t) == s) {
          ASSERT_LE(vs, v.value(bt) + 1e-12);
        }
      }
      const CappedView cv(v, 0.5 + rng.uniform01(), 1 + rng.below(9));
      ASSERT_LE(cv(bs), cv.cap());
    }
  }
}

TEST(Valuation, DemandMatchesExhaustiveSurplus) {
  SplitMix64 rng(5);
  const double inf = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = rng.below(11);
    const auto v = random_xos(rng, m, 1 + rng.below(5));
    std::vector<double> p(m);
    for (double& x : p) x = rng.below(8) == 0 ? inf : 0.5 * rng.uniform01();
    const PriceVector prices(p);
    const Bundle fast = demand_query(v, prices);
    const Bundle slow = brute_force_demand(v, prices);
    ASSERT_NEAR(v.value(fast) - prices.total(fast), v.value(slow) - prices.total(slow), 1e-12);
  }
}

TEST(Valuation, RestrictedInstanceKeepsOrder) {
  const Instance inst(2, {XosValuation::additive({1, 0}), XosValuation::additive({0, 2}),
                          XosValuation::additive({3, 3})});
  const Instance sub = inst.restricted_to({2, 0});
  ASSERT_EQ(sub.n(), 2u);
  EXPECT_DOUBLE_EQ(sub.value(0, Bundle{0, 1}), 6.0);
  EXPECT_DOUBLE_EQ(sub.value(1, Bundle{0, 1}), 1.0);
}
