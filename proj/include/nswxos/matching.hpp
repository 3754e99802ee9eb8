#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nswxos/assignment.hpp"
#include "nswxos/bundle.hpp"
#include "nswxos/valuation.hpp"

namespace nswxos {

/// Partial agent -> good map. `assignment[i]` is a column index for the raw
/// matrix solvers and a good index for the instance-level functions.
struct MatchingResult {
  std::vector<std::optional<std::size_t>> assignment;
  double product_log = 0.0;     // sum of log-values over positively valued pairs
  std::size_t positive_count = 0;

  Bundle matched_goods() const {
    std::vector<Good> goods;
    for (const auto& a : assignment) {
      if (a) goods.push_back(*a);
    }
    return make_bundle(std::move(goods));
  }
};

/// Maximum-cardinality, maximum-product matching. Zero-valued pairs are never
/// matched, so agents beyond the positive cardinality stay unmatched.
inline MatchingResult max_product_matching(const std::vector<std::vector<double>>& values) {
  const std::size_t n = values.size();
  auto solved = max_product_assignment(values, std::vector<double>(n, 0.0));
  MatchingResult out;
  out.assignment = std::move(solved.col_of_row);
  out.positive_count = static_cast<std::size_t>(solved.objective.count);
  out.product_log = solved.objective.log;
  return out;
}

/// Matching maximizing prod_i v_i(offset_i + matched good), cardinality of
/// positive outcomes first. Agents are matched into `goods`; the reported
/// product covers every agent's outcome, matched or not.
inline MatchingResult max_product_matching_with_offsets(const Instance& inst, const Bundle& goods,
                                                        const std::vector<Bundle>& offsets) {
  const std::size_t n = inst.n();
  if (offsets.size() != n) throw std::invalid_argument("offset count != agent count");
  std::vector<std::vector<double>> matched(n, std::vector<double>(goods.size()));
  std::vector<double> unmatched(n);
  for (Agent i = 0; i < n; ++i) {
    unmatched[i] = inst.value(i, offsets[i]);
    for (std::size_t c = 0; c < goods.size(); ++c) matched[i][c] = inst.value(i, unite(offsets[i], goods[c]));
  }
  auto solved = max_product_assignment(matched, unmatched);
  MatchingResult out;
  out.assignment.assign(n, std::nullopt);
  for (Agent i = 0; i < n; ++i) {
    if (solved.col_of_row[i]) out.assignment[i] = goods[*solved.col_of_row[i]];
  }
  out.positive_count = static_cast<std::size_t>(solved.objective.count);
  out.product_log = solved.objective.log;
  return out;
}

/// Max-product matching of agents to the goods of `pool` under singleton
/// values; the assignment holds good indices.
inline MatchingResult match_into(const Instance& inst, const Bundle& pool) {
  std::vector<std::vector<double>> values(inst.n(), std::vector<double>(pool.size()));
  for (Agent i = 0; i < inst.n(); ++i) {
    for (std::size_t c = 0; c < pool.size(); ++c) values[i][c] = inst.value(i, pool[c]);
  }
  auto result = max_product_matching(values);
  for (auto& a : result.assignment) {
    if (a) a = pool[*a];
  }
  return result;
}

/// floor(log2 n) + 1 rounds of Phase I.
///
/// Each round at least halves the agents without a good worth v_i(g*_i) in
/// M, so n agents need the smallest k with n / 2^k < 1. For n a power of two
/// ceil(log2 n) rounds can leave one agent unserved.
inline std::size_t matching_rounds(std::size_t n) { return static_cast<std::size_t>(std::bit_width(n)); }

struct RepeatedMatchings {
  Bundle reserved;                       // M
  std::vector<MatchingResult> rounds;    // tau_1 .. tau_t, good indices
};

/// Phase I for-loop: `rounds` max-product matchings over a shrinking pool,
/// each round's matched goods moved into the reserved set.
inline RepeatedMatchings repeated_matchings(const Instance& inst, const Bundle& goods, std::size_t rounds) {
  RepeatedMatchings out;
  Bundle pool = goods;
  for (std::size_t t = 0; t < rounds && !pool.empty(); ++t) {
    auto tau = match_into(inst, pool);
    const Bundle taken = tau.matched_goods();
    out.reserved = unite(out.reserved, taken);
    pool = difference(pool, taken);
    out.rounds.push_back(std::move(tau));
  }
  return out;
}

/// Searches for an injective h: agents -> reserved with v_i(h(i)) >= v_i(gstar[i]).
/// Augmenting-path bipartite matching over the eligibility graph.
inline std::optional<std::vector<Good>> verify_matchhigh(const Instance& inst, const Bundle& reserved,
                                                         const std::vector<Good>& gstar) {
  const std::size_t n = inst.n();
  if (gstar.size() != n) throw std::invalid_argument("gstar length != agent count");
  std::vector<std::vector<std::size_t>> eligible(n);
  for (Agent i = 0; i < n; ++i) {
    const double need = inst.value(i, gstar[i]);
    for (std::size_t c = 0; c < reserved.size(); ++c) {
      if (meets(inst.value(i, reserved[c]), need)) eligible[i].push_back(c);
    }
  }
  constexpr std::size_t kFree = static_cast<std::size_t>(-1);
  std::vector<std::size_t> owner(reserved.size(), kFree);
  std::vector<char> seen;
  auto augment = [&](auto&& self, Agent i) -> bool {
    for (std::size_t c : eligible[i]) {
      if (seen[c]) continue;
      seen[c] = 1;
      if (owner[c] == kFree || self(self, owner[c])) {
        owner[c] = i;
        return true;
      }
    }
    return false;
  };
  for (Agent i = 0; i < n; ++i) {
    seen.assign(reserved.size(), 0);
    if (!augment(augment, i)) return std::nullopt;
  }
  std::vector<Good> h(n);
  for (std::size_t c = 0; c < reserved.size(); ++c) {
    if (owner[c] != kFree) h[owner[c]] = reserved[c];
  }
  return h;
}

}  // namespace nswxos
