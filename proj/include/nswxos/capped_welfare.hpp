#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nswxos/bundle.hpp"
#include "nswxos/valuation.hpp"

namespace nswxos {

/// Local-search state: bundles Y_1..Y_n inside the pool R'.
struct WelfareState {
  Bundle pool;                   // R'
  std::vector<Bundle> bundles;   // Y_j
  std::size_t iteration = 0;

  WelfareState(Bundle pool_goods, std::size_t n) : pool(std::move(pool_goods)), bundles(n) {}

  /// Y_0 = R' minus every Y_j.
  Bundle unallocated() const {
    Bundle rest = pool;
    for (const auto& y : bundles) rest = difference(rest, y);
    return rest;
  }
};

/// Demand set D_j and its minimal high-value prefix.
struct CandidateSet {
  Bundle demand;   // D_j
  Bundle prefix;   // D^_j
};

inline std::vector<CappedView> make_views(const Instance& inst, const std::vector<double>& betas) {
  if (betas.size() != inst.n()) throw std::invalid_argument("beta count != agent count");
  std::vector<CappedView> views;
  views.reserve(inst.n());
  for (Agent j = 0; j < inst.n(); ++j) views.emplace_back(inst.valuation(j), betas[j], inst.n());
  return views;
}

/// p_g = 0 on Y_0, p_g = 2 beta_j f_{j,Y_j}(g) on Y_j, +inf outside the pool.
inline PriceVector compute_prices(const WelfareState& state, const std::vector<CappedView>& views) {
  const std::size_t m = views.empty() ? 0 : views.front().base().arity();
  std::vector<double> prices(m, std::numeric_limits<double>::infinity());
  for (Good g : state.pool) prices.at(g) = 0.0;
  for (std::size_t j = 0; j < state.bundles.size(); ++j) {
    const Bundle& y = state.bundles[j];
    if (y.empty()) continue;
    const AdditiveFunction& f = xos_query(views[j].base(), y);
    for (Good g : y) prices[g] = 2.0 * views[j].beta() * f(g);
  }
  return PriceVector(std::move(prices));
}

/// Candidate set for one agent: only goods with capped singleton value at
/// most 1/(2 sqrt n) keep their price, the rest are priced out; the demand
/// set is queried at q / beta and cut at the shortest ascending prefix whose
/// capped value reaches (92/225) / sqrt(n).
inline CandidateSet candidate_set(const PriceVector& prices, const CappedView& view) {
  const double small = 0.5 * view.cap();
  const double target = (92.0 / 225.0) * view.cap();
  std::vector<double> q(prices.size());
  for (Good g = 0; g < prices.size(); ++g) {
    q[g] = within(view(g), small) ? prices[g] : std::numeric_limits<double>::infinity();
  }
  CandidateSet out;
  out.demand = demand_query(view.base(), PriceVector(std::move(q)).scaled_down(view.beta()));
  Bundle prefix;
  for (Good g : out.demand) {
    prefix.push_back(g);
    if (meets(view(prefix), target)) {
      out.prefix = prefix;
      return out;
    }
  }
  out.prefix = out.demand;
  return out;
}

inline double capped_welfare(const WelfareState& state, const std::vector<CappedView>& views) {
  double total = 0.0;
  for (std::size_t j = 0; j < state.bundles.size(); ++j) total += views[j](state.bundles[j]);
  return total;
}

/// Welfare after handing `taken` to agent a and stripping it from everyone else.
inline double welfare_if_assigned(const WelfareState& state, const std::vector<CappedView>& views, Agent a,
                                  const Bundle& taken) {
  double total = views[a](taken);
  for (std::size_t j = 0; j < state.bundles.size(); ++j) {
    if (j != a) total += views[j](difference(state.bundles[j], taken));
  }
  return total;
}

/// One reassignment of the local search.
struct WelfareStep {
  std::size_t iteration = 0;
  double welfare_before = 0.0;
  double welfare_after = 0.0;
  Agent agent = 0;
  std::size_t prefix_size = 0;
};

/// What an observer sees at the top of each loop turn, before the decision.
struct WelfareSnapshot {
  const WelfareState& state;
  const PriceVector& prices;
  const std::vector<CandidateSet>& candidates;
  const std::vector<CappedView>& views;
  double welfare;
  std::optional<Agent> chosen;
};

using WelfareObserver = std::function<void(const WelfareSnapshot&)>;

struct CappedWelfareResult {
  Allocation bundles;               // Y_1 .. Y_n
  std::vector<WelfareStep> steps;
  double welfare = 0.0;
};

class IterationLimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Price-guided local search for sum_j min(1/sqrt n, beta_j v_j(Y_j)) over R'.
///
/// Loops while some agent a (lowest index first) satisfies
///   v^_a(D^_a) + sum_{j != a} v^_j(Y_j \ D^_a) >= sum_j v^_j(Y_j) + 1/(225 sqrt n),
/// in which case Y_a <- D^_a and D^_a is removed from the other bundles.
/// Throws IterationLimitExceeded after 225n + n reassignments.
inline CappedWelfareResult capped_social_welfare(const Instance& inst, const Bundle& pool,
                                                 const std::vector<double>& betas,
                                                 const WelfareObserver& observer = {}) {
  for (double b : betas) {
    if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("betas must be positive and finite");
  }
  const auto views = make_views(inst, betas);
  const std::size_t n = inst.n();
  const double step = 1.0 / (225.0 * std::sqrt(static_cast<double>(n)));
  const std::size_t limit = 225 * n + n;

  WelfareState state(pool, n);
  CappedWelfareResult out;
  std::vector<CandidateSet> candidates(n);
  for (;;) {
    const PriceVector prices = compute_prices(state, views);
    for (Agent j = 0; j < n; ++j) candidates[j] = candidate_set(prices, views[j]);
    const double welfare = capped_welfare(state, views);
    std::optional<Agent> chosen;
    double chosen_welfare = welfare;
    for (Agent a = 0; a < n && !chosen; ++a) {
      const double proposal = welfare_if_assigned(state, views, a, candidates[a].prefix);
      if (meets(proposal, welfare + step)) {
        chosen = a;
        chosen_welfare = proposal;
      }
    }
    if (observer) observer(WelfareSnapshot{state, prices, candidates, views, welfare, chosen});
    if (!chosen) {
      out.welfare = welfare;
      break;
    }
    if (state.iteration >= limit) {
      throw IterationLimitExceeded("capped welfare search exceeded " + std::to_string(limit) + " iterations");
    }
    const Bundle& taken = candidates[*chosen].prefix;
    for (Agent j = 0; j < n; ++j) {
      state.bundles[j] = j == *chosen ? taken : difference(state.bundles[j], taken);
    }
    ++state.iteration;
    out.steps.push_back({state.iteration, welfare, chosen_welfare, *chosen, taken.size()});
  }
  out.bundles.bundles = state.bundles;
  return out;
}

}  // namespace nswxos
