#include <gtest/gtest.h>

#include <cmath>

#include "nswxos/exact_oracles.hpp"
#include "nswxos/generators.hpp"
#include "nswxos/nsw_solver.hpp"

using namespace nswxos;

namespace {

void expect_structure(const Instance& inst, const SolveResult& r) {
  const auto& tr = r.trace;
  const std::size_t n = inst.n();
  const std::size_t m = inst.m();
  ASSERT_TRUE(r.allocation.pairwise_disjoint());
  for (Good g : r.allocation.allocated()) ASSERT_LT(g, m);

  // M, pi goods, R and R' partition [m].
  const Bundle pi_goods = tr.pi.matched_goods();
  const std::vector<Bundle> parts = {tr.reserved, pi_goods, tr.knife_pool, tr.welfare_pool};
  Bundle all;
  std::size_t total = 0;
  for (const auto& p : parts) {
    all = unite(all, p);
    total += p.size();
  }
  ASSERT_EQ(all, range_bundle(m));
  ASSERT_EQ(total, m);
  ASSERT_TRUE(difference(tr.knife.allocated(), tr.knife_pool).empty());
  if (tr.excluded.size() < n) {
    ASSERT_EQ(tr.knife.allocated(), tr.knife_pool);
  }
  ASSERT_TRUE(difference(tr.welfare.allocated(), tr.welfare_pool).empty());
  ASSERT_TRUE(difference(tr.mu.matched_goods(), tr.reserved).empty());

  for (Agent i = 0; i < n; ++i) {
    Bundle expected = tr.offset(i);
    if (auto g = tr.mu.assignment[i]) expected = unite(expected, *g);
    ASSERT_EQ(r.allocation[i], expected);
    if (tr.is_excluded(i)) {
      ASSERT_TRUE(tr.knife[i].empty());
      ASSERT_TRUE(tr.welfare[i].empty());
      ASSERT_FALSE(tr.betas[i].has_value());
      continue;
    }
    ASSERT_TRUE(tr.pi_good(i).has_value());
    ASSERT_GT(inst.value(i, *tr.pi_good(i)), 0.0);
    const double q = inst.value(i, r.allocation[i]);
    ASSERT_GE(q, inst.value(i, *tr.pi_good(i)));
    ASSERT_GE(q, inst.value(i, tr.knife[i]));
    ASSERT_GE(q, inst.value(i, tr.welfare[i]));
    if (auto g = tr.mu.assignment[i]) {
      ASSERT_GE(q, inst.value(i, *g));
    }
  }
  ASSERT_EQ(tr.result, r.allocation);
}

}  // namespace

TEST(Nsw, ValueExamples) {
  EXPECT_DOUBLE_EQ(nsw_of_values({2, 2}), 2.0);
  EXPECT_NEAR(nsw_of_values({4, 1}), 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(nsw_of_values({3, 0, 5}), 0.0);
}

TEST(Solver, SingleAgentExample) {
  const Instance inst(3, {XosValuation::additive({5, 2, 1})});
  const auto r = solve(inst, 17);
  ASSERT_EQ(r.trace.tau.size(), 1u);
  EXPECT_EQ(r.trace.reserved, (Bundle{0}));
  EXPECT_EQ(r.trace.pi_good(0), Good{1});
  EXPECT_EQ(r.trace.mu.assignment[0], Good{0});
  EXPECT_TRUE(contains(r.allocation[0], 0));
  EXPECT_GE(nsw(inst, r.allocation), 5.0);
  expect_structure(inst, r);
}

TEST(Solver, AllZeroInstance) {
  const Instance inst(4, {XosValuation::additive({0, 0, 0, 0}), XosValuation::additive({0, 0, 0, 0})});
  const auto r = solve(inst, 1);
  EXPECT_DOUBLE_EQ(nsw(inst, r.allocation), 0.0);
  EXPECT_EQ(r.trace.excluded, (std::vector<Agent>{0, 1}));
  expect_structure(inst, r);
}

TEST(Solver, FewerGoodsThanAgents) {
  const Instance inst(1, {XosValuation::additive({1}), XosValuation::additive({2}), XosValuation::additive({3})});
  const auto r = solve(inst, 3);
  expect_structure(inst, r);
  EXPECT_EQ(r.allocation.allocated(), (Bundle{0}));
}

TEST(Solver, StructureOnRandomInstances) {
  SplitMix64 rng(6);
  for (int trial = 0; trial < 150; ++trial) {
    GeneratorParams p;
    p.n = 1 + rng.below(6);
    p.m = rng.below(40);
    p.k = 1 + rng.below(3);
    p.density = trial % 2 == 0 ? 1.0 : 0.4;
    const auto file = generate(GeneratorKind::kKXosRandom, p, rng.next());
    const auto r = solve(file.instance, rng.next());
    expect_structure(file.instance, r);
  }
}

TEST(Solver, Deterministic) {
  GeneratorParams p;
  p.n = 4;
  p.m = 30;
  const auto file = generate(GeneratorKind::kKXosRandom, p, 9);
  const auto a = solve(file.instance, 123);
  const auto b = solve(file.instance, 123);
  EXPECT_EQ(a.allocation, b.allocation);
  EXPECT_EQ(a.trace.knife_pool, b.trace.knife_pool);
  EXPECT_EQ(a.trace.welfare, b.trace.welfare);
}

TEST(Solver, SeedOnlyAffectsSplit) {
  GeneratorParams p;
  p.n = 3;
  p.m = 40;
  const auto file = generate(GeneratorKind::kUniformAdditive, p, 2);
  const auto a = solve(file.instance, 1);
  const auto b = solve(file.instance, 2);
  EXPECT_EQ(a.trace.reserved, b.trace.reserved);
  EXPECT_EQ(a.trace.pi.assignment, b.trace.pi.assignment);
  EXPECT_NE(a.trace.knife_pool, b.trace.knife_pool);
}

TEST(Solver, BetasFollowKnifeAndSeedGood) {
  GeneratorParams p;
  p.n = 3;
  p.m = 50;
  const auto file = generate(GeneratorKind::kUniformAdditive, p, 4);
  const auto r = solve(file.instance, 8);
  for (Agent i = 0; i < 3; ++i) {
    const double base = file.instance.value(i, unite(r.trace.knife[i], *r.trace.pi_good(i)));
    ASSERT_TRUE(r.trace.betas[i]);
    EXPECT_NEAR(*r.trace.betas[i], 1.0 / (3.0 * base), 1e-15);
  }
}

TEST(Solver, TopupNeverLowersValues) {
  SplitMix64 rng(10);
  for (int trial = 0; trial < 40; ++trial) {
    GeneratorParams p;
    p.n = 1 + rng.below(4);
    p.m = rng.below(30);
    const auto file = generate(GeneratorKind::kKXosRandom, p, rng.next());
    const std::uint64_t seed = rng.next();
    const auto plain = solve(file.instance, seed);
    const auto extra = solve(file.instance, seed, SolveOptions{true});
    ASSERT_TRUE(extra.allocation.pairwise_disjoint());
    for (Agent i = 0; i < p.n; ++i) {
      ASSERT_TRUE(std::includes(extra.allocation[i].begin(), extra.allocation[i].end(), plain.allocation[i].begin(),
                                plain.allocation[i].end()));
      ASSERT_GE(file.instance.value(i, extra.allocation[i]), file.instance.value(i, plain.allocation[i]));
    }
    for (Good g : extra.trace.topup_goods) ASSERT_FALSE(contains(plain.allocation.allocated(), g));
  }
}

TEST(Solver, RematchBound) {
  SplitMix64 rng(12);
  std::size_t checked = 0;
  for (int trial = 0; trial < 80; ++trial) {
    GeneratorParams p;
    p.n = 2 + rng.below(2);
    p.m = p.n + 3 + rng.below(4);
    const auto file = generate(GeneratorKind::kUniformAdditive, p, rng.next());
    const auto opt = brute_force_nsw(file.instance);
    std::vector<Good> gstar;
    for (Agent i = 0; i < p.n; ++i) gstar.push_back(*best_single_good(file.instance, i, opt.allocation[i]));
    const auto r = solve(file.instance, rng.next());
    if (!verify_matchhigh(file.instance, r.trace.reserved, gstar)) continue;
    ++checked;
    const auto [q, qstar] = rematch_bound_check(file.instance, r.trace, gstar);
    ASSERT_TRUE(meets(q, 0.5 * qstar));
  }
  EXPECT_GT(checked, 0u);
  EXPECT_THROW(rematch_bound_check(Instance(1, {XosValuation::additive({1})}), SolveTrace{}, {}),
               std::invalid_argument);
}

TEST(Solver, RematchIdentity) {
  const Instance inst(4, {XosValuation::additive({5, 4, 1, 1}), XosValuation::additive({4, 5, 1, 1})});
  const auto r = solve(inst, 0);
  std::vector<Good> gstar = {*r.trace.mu.assignment[0], *r.trace.mu.assignment[1]};
  const auto [q, qstar] = rematch_bound_check(inst, r.trace, gstar);
  EXPECT_DOUBLE_EQ(q, qstar);
}
