#pragma once

#include <cstddef>
#include <vector>

#include "nswxos/bundle.hpp"
#include "nswxos/valuation.hpp"

namespace nswxos {

/// Shrinks R to goods that are individually small: repeatedly drops the
/// lowest-index good with v(g) >= v(G) / (16 n) until none is left.
inline Bundle prune_small(const XosValuation& v, const Bundle& pool, std::size_t n) {
  const double factor = 1.0 / (16.0 * static_cast<double>(n));
  Bundle kept = pool;
  bool changed = true;
  while (changed && !kept.empty()) {
    changed = false;
    const double threshold = factor * v.value(kept);
    for (std::size_t idx = 0; idx < kept.size(); ++idx) {
      if (meets(v.value(kept[idx]), threshold)) {
        kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(idx));
        changed = true;
        break;
      }
    }
  }
  return kept;
}

struct MovingKnifeResult {
  Allocation bundles;                 // X_1 .. X_n, a partition of R
  std::vector<Bundle> supports;       // G_j
  std::vector<char> assigned_in_sweep;
};

/// Discrete moving knife over R.
///
/// Each agent j is restricted to v'_j(S) = v_j(S ∩ G_j) with G_j from
/// prune_small. Goods are swept in ascending order into P; as soon as a
/// remaining agent has v'_a(P) >= v'_a(R) / (16 n) the lowest such agent takes
/// P. Goods left when agents run out go to the last agent.
inline MovingKnifeResult discrete_moving_knife(const Instance& inst, const Bundle& pool) {
  const std::size_t n = inst.n();
  const double factor = 1.0 / (16.0 * static_cast<double>(n));
  MovingKnifeResult out;
  out.bundles = Allocation(n);
  out.assigned_in_sweep.assign(n, 0);
  out.supports.reserve(n);
  for (Agent j = 0; j < n; ++j) out.supports.push_back(prune_small(inst.valuation(j), pool, n));

  auto restricted = [&](Agent j, const Bundle& s) { return inst.value(j, intersect(s, out.supports[j])); };
  std::vector<double> threshold(n);
  for (Agent j = 0; j < n; ++j) threshold[j] = factor * restricted(j, pool);

  std::vector<Agent> remaining(n);
  for (Agent j = 0; j < n; ++j) remaining[j] = j;

  Bundle piece;
  std::size_t next = 0;
  while (next < pool.size() && !remaining.empty()) {
    piece.push_back(pool[next++]);
    for (auto it = remaining.begin(); it != remaining.end(); ++it) {
      if (meets(restricted(*it, piece), threshold[*it])) {
        out.bundles[*it] = piece;
        out.assigned_in_sweep[*it] = 1;
        remaining.erase(it);
        piece.clear();
        break;
      }
    }
  }
  // Unclaimed goods: the current piece plus everything not yet swept.
  Bundle leftover = piece;
  leftover.insert(leftover.end(), pool.begin() + static_cast<std::ptrdiff_t>(next), pool.end());
  if (!leftover.empty()) out.bundles[n - 1] = unite(out.bundles[n - 1], leftover);
  return out;
}

}  // namespace nswxos
