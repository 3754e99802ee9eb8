#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nswxos/bundle.hpp"
#include "nswxos/capped_welfare.hpp"
#include "nswxos/matching.hpp"
#include "nswxos/moving_knife.hpp"
#include "nswxos/rng.hpp"
#include "nswxos/valuation.hpp"

namespace nswxos {

/// Geometric mean of agent values, computed in log space; 0 if any value is 0.
inline double nsw_of_values(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double log_sum = 0.0;
  for (double x : values) {
    if (!(x > 0.0)) return 0.0;
    log_sum += std::log(x);
  }
  return std::exp(log_sum / static_cast<double>(values.size()));
}

inline std::vector<double> agent_values(const Instance& inst, const Allocation& alloc) {
  if (alloc.agents() != inst.n()) throw std::invalid_argument("allocation size != agent count");
  std::vector<double> values(inst.n());
  for (Agent i = 0; i < inst.n(); ++i) values[i] = inst.value(i, alloc[i]);
  return values;
}

inline double nsw(const Instance& inst, const Allocation& alloc) { return nsw_of_values(agent_values(inst, alloc)); }

/// Every intermediate object of one solver run.
struct SolveTrace {
  std::uint64_t seed = 0;
  Bundle reserved;                          // M
  std::vector<MatchingResult> tau;          // Phase I rounds
  MatchingResult pi;                        // seed matching
  Bundle knife_pool;                        // R
  Bundle welfare_pool;                      // R'
  Allocation knife;                         // X
  std::vector<std::optional<double>> betas; // unset for excluded agents
  Allocation welfare;                       // Y
  std::vector<WelfareStep> welfare_steps;
  MatchingResult mu;                        // final rematch into M
  Allocation result;                        // Q
  std::vector<Agent> excluded;              // agents with no positive seed good
  std::vector<Good> topup_goods;            // goods handed out by the optional top-up

  std::optional<Good> pi_good(Agent i) const { return pi.assignment.at(i); }

  bool is_excluded(Agent i) const {
    for (Agent z : excluded) {
      if (z == i) return true;
    }
    return false;
  }

  /// {pi(i)} ∪ X_i ∪ Y_i: everything agent i holds before the final rematch.
  Bundle offset(Agent i) const {
    Bundle b = unite(knife[i], welfare[i]);
    if (auto g = pi_good(i)) b = unite(b, *g);
    return b;
  }
};

struct SolveOptions {
  /// Hand leftover goods to the agent with the largest log-value gain.
  bool topup = false;
};

struct SolveResult {
  Allocation allocation;
  SolveTrace trace;
};

namespace detail {

inline void topup_leftovers(const Instance& inst, Allocation& q, std::vector<Good>& handed_out) {
  const Bundle held = q.allocated();
  for (Good g = 0; g < inst.m(); ++g) {
    if (contains(held, g)) continue;
    std::optional<Agent> best;
    double best_gain = 0.0;
    for (Agent i = 0; i < inst.n(); ++i) {
      const double before = inst.value(i, q[i]);
      const double after = inst.value(i, unite(q[i], g));
      if (!(after > before)) continue;
      const double gain = before > 0.0 ? std::log(after) - std::log(before) : std::numeric_limits<double>::infinity();
      if (!best || gain > best_gain) {
        best = i;
        best_gain = gain;
      }
    }
    if (best) {
      q[*best] = unite(q[*best], g);
      handed_out.push_back(g);
    }
  }
}

}  // namespace detail

/// Sublinear-approximation NSW algorithm for XOS valuations.
///
///   I.   floor(log2 n) + 1 repeated max-product matchings reserve M; a further
///        matching pi seeds every agent from [m] \ M. Agents left without a
///        positive pi good are excluded from III and IV.
///   II.  Every other good goes to R or R' by a fair coin (SplitMix64 seeded
///        with `seed`, one draw per good in ascending order, top bit 0 -> R).
///   III. Moving knife over R among the participating agents.
///   IV.  beta_i = 1 / (n' v_i(X_i + pi(i))) with n' participating agents,
///        then the capped-welfare search over R'.
///   Finally mu rematches every agent into M with offsets pi(i) + X_i + Y_i.
inline SolveResult solve(const Instance& inst, std::uint64_t seed, const SolveOptions& options = {}) {
  const std::size_t n = inst.n();
  const std::size_t m = inst.m();
  SolveResult out;
  SolveTrace& tr = out.trace;
  tr.seed = seed;

  auto phase_one = repeated_matchings(inst, range_bundle(m), matching_rounds(n));
  tr.reserved = std::move(phase_one.reserved);
  tr.tau = std::move(phase_one.rounds);

  Bundle rest = difference(range_bundle(m), tr.reserved);
  tr.pi = match_into(inst, rest);
  rest = difference(rest, tr.pi.matched_goods());

  std::vector<Agent> participants;
  for (Agent i = 0; i < n; ++i) {
    if (tr.pi.assignment[i]) {
      participants.push_back(i);
    } else {
      tr.excluded.push_back(i);
    }
  }

  SplitMix64 rng(seed);
  for (Good g : rest) {
    if (rng.coin()) {
      tr.welfare_pool.push_back(g);
    } else {
      tr.knife_pool.push_back(g);
    }
  }

  tr.knife = Allocation(n);
  tr.welfare = Allocation(n);
  tr.betas.assign(n, std::nullopt);
  if (!participants.empty()) {
    const Instance sub = inst.restricted_to(participants);
    const std::size_t np = participants.size();
    const auto knife = discrete_moving_knife(sub, tr.knife_pool);
    std::vector<double> betas(np);
    for (std::size_t k = 0; k < np; ++k) {
      const Agent i = participants[k];
      tr.knife[i] = knife.bundles[k];
      const double base = inst.value(i, unite(tr.knife[i], *tr.pi.assignment[i]));
      betas[k] = 1.0 / (static_cast<double>(np) * base);
      tr.betas[i] = betas[k];
    }
    auto welfare = capped_social_welfare(sub, tr.welfare_pool, betas);
    for (std::size_t k = 0; k < np; ++k) tr.welfare[participants[k]] = welfare.bundles[k];
    tr.welfare_steps = std::move(welfare.steps);
    for (auto& step : tr.welfare_steps) step.agent = participants[step.agent];
  }

  std::vector<Bundle> offsets(n);
  for (Agent i = 0; i < n; ++i) offsets[i] = tr.offset(i);
  tr.mu = max_product_matching_with_offsets(inst, tr.reserved, offsets);

  out.allocation = Allocation(n);
  for (Agent i = 0; i < n; ++i) {
    out.allocation[i] = offsets[i];
    if (auto g = tr.mu.assignment[i]) out.allocation[i] = unite(out.allocation[i], *g);
  }
  if (options.topup) detail::topup_leftovers(inst, out.allocation, tr.topup_goods);
  tr.result = out.allocation;
  return out;
}

/// NSW of the returned allocation and of Q*_i = {gstar_i} + pi(i) + X_i + Y_i.
inline std::pair<double, double> rematch_bound_check(const Instance& inst, const SolveTrace& trace,
                                                     const std::vector<Good>& gstar) {
  if (gstar.size() != inst.n()) throw std::invalid_argument("gstar length != agent count");
  Allocation swapped(inst.n());
  for (Agent i = 0; i < inst.n(); ++i) swapped[i] = unite(trace.offset(i), gstar[i]);
  return {nsw(inst, trace.result), nsw(inst, swapped)};
}

}  // namespace nswxos
