#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nswxos/bundle.hpp"
#include "nswxos/nsw_solver.hpp"
#include "nswxos/rng.hpp"
#include "nswxos/valuation.hpp"

namespace nswxos {

/// Thrown when an exact computation would exceed its work budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultBudget = 1e7;

namespace detail {

inline double power(double base, std::size_t exp) {
  double r = 1.0;
  for (std::size_t k = 0; k < exp; ++k) r *= base;
  return r;
}

/// v(S) for every S ⊆ [m], indexed by bitmask.
inline std::vector<double> subset_values(const XosValuation& v, std::size_t m) {
  const std::size_t full = std::size_t{1} << m;
  std::vector<double> best(full, 0.0), sums(full, 0.0);
  for (const auto& f : v.family()) {
    for (std::size_t s = 1; s < full; ++s) {
      const std::size_t low = s & (~s + 1);
      sums[s] = sums[s ^ low] + f(static_cast<Good>(std::countr_zero(low)));
      best[s] = std::max(best[s], sums[s]);
    }
  }
  return best;
}

inline Bundle bundle_of_mask(std::size_t mask) {
  Bundle b;
  for (Good g = 0; mask != 0; ++g, mask >>= 1) {
    if (mask & 1U) b.push_back(g);
  }
  return b;
}

/// Maximizes sum_i score[i][T_i] over disjoint T_0..T_{k-1} ⊆ [m]. When
/// `cover` is set the T_i must partition [m]; otherwise goods may stay out.
inline std::vector<std::size_t> partition_dp(const std::vector<std::vector<double>>& score, std::size_t m,
                                             bool cover) {
  const std::size_t k = score.size();
  const std::size_t full = std::size_t{1} << m;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best(k, std::vector<double>(full, neg_inf));
  std::vector<std::vector<std::uint32_t>> pick(k, std::vector<std::uint32_t>(full, 0));
  for (std::size_t s = 0; s < full; ++s) {
    if (cover) {
      best[0][s] = score[0][s];
      pick[0][s] = static_cast<std::uint32_t>(s);
    } else {
      // Agent 0 takes the best subset of s; the remainder is unallocated.
      for (std::size_t t = s;; t = (t - 1) & s) {
        if (score[0][t] > best[0][s]) {
          best[0][s] = score[0][t];
          pick[0][s] = static_cast<std::uint32_t>(t);
        }
        if (t == 0) break;
      }
    }
  }
  for (std::size_t i = 1; i < k; ++i) {
    const bool last = i + 1 == k;
    for (std::size_t s = last ? full - 1 : 0; s < full; ++s) {
      for (std::size_t t = s;; t = (t - 1) & s) {
        const double cand = score[i][t] + best[i - 1][s ^ t];
        if (cand > best[i][s]) {
          best[i][s] = cand;
          pick[i][s] = static_cast<std::uint32_t>(t);
        }
        if (t == 0) break;
      }
    }
  }
  std::vector<std::size_t> masks(k, 0);
  std::size_t s = full - 1;
  if (best[k - 1][s] == neg_inf) return masks;  // infeasible objective; caller handles
  for (std::size_t i = k; i-- > 0;) {
    masks[i] = pick[i][s];
    s ^= masks[i];
  }
  return masks;
}

/// Visits every map goods -> [0, bins) in lexicographic order of
/// (a[0], ..., a[m-1]), keeping running per-bin family sums.
template <class Visit>
void enumerate_assignments(const Instance& inst, std::size_t bins, Visit&& visit) {
  const std::size_t n = inst.n();
  const std::size_t m = inst.m();
  std::vector<std::size_t> owner(m, 0);
  std::vector<std::vector<double>> sums(n);
  for (Agent i = 0; i < n; ++i) sums[i].assign(inst.valuation(i).family().size(), 0.0);
  auto move = [&](Good g, std::size_t from, std::size_t to) {
    if (from < n) {
      const auto& fam = inst.valuation(from).family();
      for (std::size_t k = 0; k < fam.size(); ++k) sums[from][k] -= fam[k](g);
    }
    if (to < n) {
      const auto& fam = inst.valuation(to).family();
      for (std::size_t k = 0; k < fam.size(); ++k) sums[to][k] += fam[k](g);
    }
  };
  for (Good g = 0; g < m; ++g) move(g, n, 0);
  std::vector<double> values(n);
  for (;;) {
    for (Agent i = 0; i < n; ++i) values[i] = *std::max_element(sums[i].begin(), sums[i].end());
    visit(owner, values);
    std::size_t pos = m;
    while (pos > 0) {
      --pos;
      if (owner[pos] + 1 < bins) {
        move(pos, owner[pos], owner[pos] + 1);
        ++owner[pos];
        break;
      }
      move(pos, owner[pos], 0);
      owner[pos] = 0;
      if (pos == 0) return;
    }
    if (m == 0) return;
  }
}

inline Allocation allocation_of(const std::vector<std::size_t>& owner, std::size_t n) {
  Allocation a(n);
  for (Good g = 0; g < owner.size(); ++g) {
    if (owner[g] < n) a[owner[g]].push_back(g);
  }
  return a;
}

enum class ExactMethod { kEnumerate, kSubsetDp };

inline ExactMethod pick_method(std::size_t bins, std::size_t agents, std::size_t m, double budget) {
  const double enumerate_work = power(static_cast<double>(bins), m);
  if (enumerate_work <= budget) return ExactMethod::kEnumerate;
  const double dp_work = static_cast<double>(agents) * power(3.0, m);
  if (m <= 24 && dp_work <= budget) return ExactMethod::kSubsetDp;
  throw BudgetExceeded("exact search over " + std::to_string(m) + " goods exceeds budget " +
                       std::to_string(budget));
}

}  // namespace detail

struct ExactSolution {
  Allocation allocation;
  double value = 0.0;
};

namespace detail {

inline ExactSolution nsw_by_enumeration(const Instance& inst) {
  const std::size_t n = inst.n();
  const std::size_t m = inst.m();
  // Running sums drift; values this close to zero are zero.
  std::vector<double> zero_below(n);
  for (Agent i = 0; i < n; ++i) zero_below[i] = 1e-12 * inst.value(i, range_bundle(m));
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_owner(m, 0);
  enumerate_assignments(inst, n, [&](const std::vector<std::size_t>& owner, const std::vector<double>& v) {
    double s = 0.0;
    for (Agent i = 0; i < n; ++i) {
      if (!(v[i] > zero_below[i])) return;
      s += std::log(v[i]);
    }
    if (std::isinf(best) || s > best + 1e-12 * std::max(1.0, std::abs(best))) {
      best = s;
      best_owner = owner;
    }
  });
  ExactSolution out;
  out.allocation = allocation_of(best_owner, n);
  out.value = nsw(inst, out.allocation);
  return out;
}

inline ExactSolution nsw_by_subset_dp(const Instance& inst) {
  const std::size_t n = inst.n();
  const std::size_t m = inst.m();
  std::vector<std::vector<double>> score(n);
  for (Agent i = 0; i < n; ++i) {
    score[i] = subset_values(inst.valuation(i), m);
    for (double& x : score[i]) x = x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
  }
  const auto masks = partition_dp(score, m, true);
  ExactSolution out;
  out.allocation = Allocation(n);
  bool feasible = false;
  for (std::size_t mask : masks) feasible = feasible || mask != 0;
  if (feasible || m == 0) {
    for (Agent i = 0; i < n; ++i) out.allocation[i] = bundle_of_mask(masks[i]);
  } else {
    out.allocation[0] = range_bundle(m);
  }
  out.value = nsw(inst, out.allocation);
  return out;
}

inline ExactSolution capped_sw_by_enumeration(const Instance& inst, const std::vector<CappedView>& views) {
  const std::size_t n = inst.n();
  double best = -1.0;
  std::vector<std::size_t> best_owner(inst.m(), 0);
  enumerate_assignments(inst, n + 1, [&](const std::vector<std::size_t>& owner, const std::vector<double>& v) {
    double s = 0.0;
    for (Agent i = 0; i < n; ++i) s += std::min(views[i].cap(), views[i].beta() * v[i]);
    if (s > best + 1e-12 * std::max(1.0, best)) {
      best = s;
      best_owner = owner;
    }
  });
  ExactSolution out;
  out.allocation = allocation_of(best_owner, n);
  for (Agent i = 0; i < n; ++i) out.value += views[i](out.allocation[i]);
  return out;
}

inline ExactSolution capped_sw_by_subset_dp(const Instance& inst, const std::vector<CappedView>& views) {
  const std::size_t n = inst.n();
  std::vector<std::vector<double>> score(n);
  for (Agent i = 0; i < n; ++i) {
    score[i] = subset_values(inst.valuation(i), inst.m());
    for (double& x : score[i]) x = std::min(views[i].cap(), views[i].beta() * x);
  }
  const auto masks = partition_dp(score, inst.m(), false);
  ExactSolution out;
  out.allocation = Allocation(n);
  for (Agent i = 0; i < n; ++i) out.allocation[i] = bundle_of_mask(masks[i]);
  for (Agent i = 0; i < n; ++i) out.value += views[i](out.allocation[i]);
  return out;
}

inline ExactSolution sw_by_enumeration(const Instance& inst) {
  const std::size_t n = inst.n();
  double best = -1.0;
  std::vector<std::size_t> best_owner(inst.m(), 0);
  enumerate_assignments(inst, n, [&](const std::vector<std::size_t>& owner, const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    if (s > best + 1e-12 * std::max(1.0, best)) {
      best = s;
      best_owner = owner;
    }
  });
  ExactSolution out;
  out.allocation = allocation_of(best_owner, n);
  for (Agent i = 0; i < n; ++i) out.value += inst.value(i, out.allocation[i]);
  return out;
}

inline ExactSolution sw_by_subset_dp(const Instance& inst) {
  const std::size_t n = inst.n();
  std::vector<std::vector<double>> score(n);
  for (Agent i = 0; i < n; ++i) score[i] = subset_values(inst.valuation(i), inst.m());
  const auto masks = partition_dp(score, inst.m(), true);
  ExactSolution out;
  out.allocation = Allocation(n);
  for (Agent i = 0; i < n; ++i) out.allocation[i] = bundle_of_mask(masks[i]);
  for (Agent i = 0; i < n; ++i) out.value += inst.value(i, out.allocation[i]);
  return out;
}

}  // namespace detail

/// Exact NSW optimum over all complete assignments.
///
/// Small cases enumerate the n^m assignments and return the lexicographically
/// smallest optimal assignment vector. Larger ones (up to the budget in
/// n * 3^m steps) use a subset DP over log-values, which returns an optimal
/// allocation without that tie-break guarantee.
inline ExactSolution brute_force_nsw(const Instance& inst, double budget = kDefaultBudget) {
  if (detail::pick_method(inst.n(), inst.n(), inst.m(), budget) == detail::ExactMethod::kEnumerate) {
    return detail::nsw_by_enumeration(inst);
  }
  return detail::nsw_by_subset_dp(inst);
}

/// Exact maximum of sum_j v^_j(A_j); goods may stay unassigned.
inline ExactSolution brute_force_capped_sw(const Instance& inst, const std::vector<double>& betas,
                                           double budget = kDefaultBudget) {
  const auto views = make_views(inst, betas);
  if (detail::pick_method(inst.n() + 1, inst.n(), inst.m(), budget) == detail::ExactMethod::kEnumerate) {
    return detail::capped_sw_by_enumeration(inst, views);
  }
  return detail::capped_sw_by_subset_dp(inst, views);
}

/// Exact maximum of the uncapped social welfare sum_i v_i(A_i).
inline ExactSolution brute_force_social_welfare(const Instance& inst, double budget = kDefaultBudget) {
  if (detail::pick_method(inst.n(), inst.n(), inst.m(), budget) == detail::ExactMethod::kEnumerate) {
    return detail::sw_by_enumeration(inst);
  }
  return detail::sw_by_subset_dp(inst);
}

/// Exhaustive demand oracle with the same tie-break as demand_query: the
/// highest surplus, then the smaller set, then the lowest bitmask.
inline Bundle brute_force_demand(const XosValuation& v, const PriceVector& p) {
  const std::size_t m = v.arity();
  if (m > 20) throw std::invalid_argument("exhaustive demand needs m <= 20");
  if (p.size() != m) throw std::invalid_argument("price vector arity mismatch");
  const auto values = detail::subset_values(v, m);
  const std::size_t full = std::size_t{1} << m;
  std::size_t best_mask = 0;
  double best = 0.0;
  for (std::size_t s = 1; s < full; ++s) {
    double price = 0.0;
    for (std::size_t rest = s; rest != 0; rest &= rest - 1) price += p[static_cast<Good>(std::countr_zero(rest))];
    if (std::isinf(price)) continue;
    const double surplus = values[s] - price;
    const double slack = 1e-12 * std::max(1.0, std::abs(best));
    if (surplus > best + slack) {
      best = surplus;
      best_mask = s;
    } else if (surplus >= best - slack && std::popcount(s) < std::popcount(best_mask)) {
      best = std::max(best, surplus);
      best_mask = s;
    }
  }
  return detail::bundle_of_mask(best_mask);
}

enum class AgentType { kT1, kT2, kT3 };

/// Diagnostic labels of one agent relative to an optimal allocation N.
struct AgentLabel {
  AgentType type = AgentType::kT1;
  bool p = false;      // T2 with high value inside M + pi([n])
  bool pbar = false;   // T2, otherwise
  bool u = false;      // (Pbar ∪ T3) with X_i + pi(i) already good
  bool ubar = false;   // (Pbar ∪ T3), otherwise
  bool b = false;      // Ubar with a large Y_i
  std::optional<Good> gstar;
  double optimal_value = 0.0;
};

struct AgentClassification {
  std::vector<AgentLabel> agents;
  bool case_one = false;          // |T1 + P + U| >= n / 27
  bool small_n_warning = false;   // thresholds are asymptotic; n < 16
};

inline constexpr double kBonusConstant = 1.0 / 2.2e4;

/// The most valuable single good of `bundle` for agent i, lowest index on ties.
inline std::optional<Good> best_single_good(const Instance& inst, Agent i, const Bundle& bundle) {
  std::optional<Good> best;
  double best_value = -1.0;
  for (Good g : bundle) {
    const double val = inst.value(i, g);
    if (val > best_value) {
      best_value = val;
      best = g;
    }
  }
  return best;
}

/// Labels agents T1/T2/T3, P/Pbar, U/Ubar and B. The log in the T2/T3
/// boundary is natural and clamped below by 1.
inline AgentClassification classify_agents(const Instance& inst, const Allocation& optimal, const SolveTrace& trace) {
  const std::size_t n = inst.n();
  if (optimal.agents() != n || trace.knife.agents() != n || trace.welfare.agents() != n) {
    throw std::invalid_argument("classification inputs disagree on agent count");
  }
  const double nd = static_cast<double>(n);
  const double root = std::sqrt(nd);
  const double log_n = std::max(1.0, std::log(nd));
  const Bundle early = unite(trace.reserved, trace.pi.matched_goods());

  AgentClassification out;
  out.small_n_warning = n < 16;
  out.agents.resize(n);
  std::size_t good_side = 0;
  for (Agent i = 0; i < n; ++i) {
    AgentLabel& label = out.agents[i];
    const double opt = inst.value(i, optimal[i]);
    label.optimal_value = opt;
    label.gstar = best_single_good(inst, i, optimal[i]);
    const double top = label.gstar ? inst.value(i, *label.gstar) : 0.0;
    if (meets(top, opt / (256.0 * root))) {
      label.type = AgentType::kT1;
    } else if (top < opt / (16.0 * nd * log_n)) {
      label.type = AgentType::kT3;
    } else {
      label.type = AgentType::kT2;
      label.p = meets(inst.value(i, intersect(optimal[i], early)), opt / 16.0);
      label.pbar = !label.p;
    }
    if (label.pbar || label.type == AgentType::kT3) {
      Bundle seeded = trace.knife[i];
      if (auto g = trace.pi_good(i)) seeded = unite(seeded, *g);
      label.u = meets(inst.value(i, seeded), opt / (4.0 * root));
      label.ubar = !label.u;
      if (label.ubar) label.b = meets(inst.value(i, trace.welfare[i]), kBonusConstant / root * opt);
    }
    if (label.type == AgentType::kT1 || label.p || label.u) ++good_side;
  }
  out.case_one = 27.0 * static_cast<double>(good_side) >= nd;
  return out;
}

struct ConcentrationOutcome {
  double frequency = 0.0;   // fraction of trials with v(Nbar ∩ R) <= v(Nbar) / 3
  double bound = 0.0;       // exp(-sqrt(n) / 18)
  bool degenerate = false;  // Nbar empty or worthless
  std::size_t trials = 0;
};

/// Monte Carlo estimate of how often a fair-coin half of Nbar keeps at most a
/// third of its value. Requires every good of Nbar to be worth at most
/// v(Nbar) / sqrt(n).
inline ConcentrationOutcome concentration_experiment(const XosValuation& v, const Bundle& nbar, std::size_t n,
                                                     std::size_t trials, std::uint64_t seed) {
  if (n == 0 || trials == 0) throw std::invalid_argument("n and trials must be positive");
  const double whole = v.value(nbar);
  const double cap = whole / std::sqrt(static_cast<double>(n));
  for (Good g : nbar) {
    if (!within(v.value(g), cap)) {
      throw std::invalid_argument("good " + std::to_string(g) + " exceeds v(Nbar)/sqrt(n)");
    }
  }
  ConcentrationOutcome out;
  out.bound = std::exp(-std::sqrt(static_cast<double>(n)) / 18.0);
  out.trials = trials;
  out.degenerate = !(whole > 0.0);
  SplitMix64 rng(seed);
  std::size_t failures = 0;
  Bundle half;
  for (std::size_t t = 0; t < trials; ++t) {
    half.clear();
    for (Good g : nbar) {
      if (!rng.coin()) half.push_back(g);
    }
    if (v.value(half) <= whole / 3.0) ++failures;
  }
  out.frequency = static_cast<double>(failures) / static_cast<double>(trials);
  return out;
}

}  // namespace nswxos
