#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nswxos/bundle.hpp"
#include "nswxos/exact_oracles.hpp"
#include "nswxos/rng.hpp"
#include "nswxos/valuation.hpp"

namespace nswxos {

/// Ordered partition of [m] into n parts of size m / n.
using Equipartition = std::vector<Bundle>;

/// r equipartitions of [m] into n parts each.
struct Equicovering {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<Equipartition> partitions;

  std::size_t r() const { return partitions.size(); }
};

/// Agent i holds B_i ⊆ [t]; elements are 0-based.
struct MultiDisjointnessInstance {
  std::size_t t = 0;
  std::vector<std::vector<std::size_t>> subsets;
};

inline void require_divisible(std::size_t m, std::size_t n) {
  if (n == 0 || m % n != 0) {
    throw std::invalid_argument("part count " + std::to_string(n) + " must divide " + std::to_string(m));
  }
}

/// Fisher-Yates shuffle of [m], cut into n consecutive chunks.
inline Equipartition random_equipartition(std::size_t m, std::size_t n, SplitMix64& rng) {
  require_divisible(m, n);
  std::vector<Good> order = range_bundle(m);
  for (std::size_t k = m; k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
  const std::size_t size = m / n;
  Equipartition parts(n);
  for (std::size_t i = 0; i < n; ++i) {
    parts[i] = make_bundle({order.begin() + static_cast<std::ptrdiff_t>(i * size),
                            order.begin() + static_cast<std::ptrdiff_t>((i + 1) * size)});
  }
  return parts;
}

inline Equipartition random_equipartition(std::size_t m, std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  return random_equipartition(m, n, rng);
}

inline Equicovering build_equicovering(std::size_t m, std::size_t n, std::size_t r, std::uint64_t seed) {
  require_divisible(m, n);
  SplitMix64 rng(seed);
  Equicovering e{m, n, {}};
  e.partitions.reserve(r);
  for (std::size_t s = 0; s < r; ++s) e.partitions.push_back(random_equipartition(m, n, rng));
  return e;
}

/// m (1 - (1 - 1/n)^n + eps).
inline double equicover_bound(std::size_t m, std::size_t n, double eps) {
  const double nd = static_cast<double>(n);
  return static_cast<double>(m) * (1.0 - std::pow(1.0 - 1.0 / nd, nd) + eps);
}

struct VerifyMode {
  bool exhaustive = true;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;

  static VerifyMode all() { return {}; }
  static VerifyMode sampled(std::size_t k, std::uint64_t seed) { return {false, k, seed}; }
};

struct EquicoverVerdict {
  bool ok = true;
  std::size_t worst_union = 0;
  std::vector<std::size_t> worst_tuple;   // s_1..s_n of the largest union seen
  std::size_t tuples_checked = 0;
  double bound = 0.0;
};

namespace detail {

inline std::size_t union_size(const Equicovering& e, const std::vector<std::size_t>& tuple,
                              std::vector<char>& mark) {
  mark.assign(e.m, 0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    for (Good g : e.partitions[tuple[i]][i]) {
      if (!mark[g]) {
        mark[g] = 1;
        ++count;
      }
    }
  }
  return count;
}

inline double falling_factorial(std::size_t r, std::size_t n) {
  double out = 1.0;
  for (std::size_t k = 0; k < n; ++k) out *= static_cast<double>(r > k ? r - k : 0);
  return out;
}

}  // namespace detail

/// Checks |∪_i P^{s_i}_i| <= m (1 - (1 - 1/n)^n + eps) over tuples of distinct
/// partition indices: all of them, or k uniformly sampled ones.
inline EquicoverVerdict verify_equicovering(const Equicovering& e, double eps, const VerifyMode& mode = VerifyMode::all(),
                                            double budget = kDefaultBudget) {
  EquicoverVerdict out;
  out.bound = equicover_bound(e.m, e.n, eps);
  const std::size_t n = e.n;
  const std::size_t r = e.r();
  if (r < n) return out;  // no tuple of distinct indices exists
  std::vector<char> mark;
  auto consider = [&](const std::vector<std::size_t>& tuple) {
    const std::size_t size = detail::union_size(e, tuple, mark);
    ++out.tuples_checked;
    if (out.worst_tuple.empty() || size > out.worst_union) {
      out.worst_union = size;
      out.worst_tuple = tuple;
    }
    if (static_cast<double>(size) > out.bound + 1e-9) out.ok = false;
  };

  if (mode.exhaustive) {
    if (detail::falling_factorial(r, n) > budget) {
      throw BudgetExceeded("exhaustive equicovering check needs " + std::to_string(detail::falling_factorial(r, n)) +
                           " tuples");
    }
    std::vector<std::size_t> tuple(n);
    std::vector<char> used(r, 0);
    auto rec = [&](auto&& self, std::size_t depth) -> void {
      if (depth == n) {
        consider(tuple);
        return;
      }
      for (std::size_t s = 0; s < r; ++s) {
        if (used[s]) continue;
        used[s] = 1;
        tuple[depth] = s;
        self(self, depth + 1);
        used[s] = 0;
      }
    };
    rec(rec, 0);
  } else {
    SplitMix64 rng(mode.seed);
    std::vector<std::size_t> pool(r);
    std::vector<std::size_t> tuple(n);
    for (std::size_t k = 0; k < mode.samples; ++k) {
      std::iota(pool.begin(), pool.end(), std::size_t{0});
      for (std::size_t i = 0; i < n; ++i) {
        std::swap(pool[i], pool[i + rng.below(r - i)]);
        tuple[i] = pool[i];
      }
      consider(tuple);
    }
  }
  return out;
}

/// Builds equicoverings from seed, seed + 1, ... until one verifies.
inline std::optional<std::pair<Equicovering, std::uint64_t>> find_equicovering(
    std::size_t m, std::size_t n, std::size_t r, double eps, std::uint64_t seed, std::size_t retries,
    const VerifyMode& mode = VerifyMode::all()) {
  for (std::size_t attempt = 0; attempt <= retries; ++attempt) {
    auto e = build_equicovering(m, n, r, seed + attempt);
    if (verify_equicovering(e, eps, mode).ok) return std::make_pair(std::move(e), seed + attempt);
  }
  return std::nullopt;
}

/// Agent i values goods through the indicator functions of P^s_i, s ∈ B_i.
inline Instance reduce_multidisjointness(const MultiDisjointnessInstance& md, const Equicovering& e) {
  if (md.t != e.r()) throw std::invalid_argument("multi-disjointness t != equicovering r");
  if (md.subsets.size() != e.n) throw std::invalid_argument("multi-disjointness agent count != n");
  std::vector<XosValuation> vals;
  vals.reserve(e.n);
  for (std::size_t i = 0; i < e.n; ++i) {
    std::vector<AdditiveFunction> family;
    for (std::size_t s : md.subsets[i]) {
      if (s >= md.t) throw std::invalid_argument("subset element out of range");
      std::vector<double> w(e.m, 0.0);
      for (Good g : e.partitions[s][i]) w[g] = 1.0;
      family.emplace_back(std::move(w));
    }
    if (family.empty()) family.push_back(AdditiveFunction::zero(e.m));
    vals.emplace_back(std::move(family));
  }
  return Instance(e.m, std::move(vals));
}

/// Totally intersecting input: a shared element plus random extras.
inline MultiDisjointnessInstance sample_intersecting(std::size_t n, std::size_t t, SplitMix64& rng) {
  if (t == 0) throw std::invalid_argument("t must be positive");
  MultiDisjointnessInstance md{t, std::vector<std::vector<std::size_t>>(n)};
  const std::size_t common = rng.below(t);
  for (auto& b : md.subsets) {
    for (std::size_t s = 0; s < t; ++s) {
      if (s == common || rng.coin()) b.push_back(s);
    }
  }
  return md;
}

/// Totally disjoint input: each agent gets one distinct element (when t >= n),
/// remaining elements go to a random agent or to nobody.
inline MultiDisjointnessInstance sample_disjoint(std::size_t n, std::size_t t, SplitMix64& rng) {
  MultiDisjointnessInstance md{t, std::vector<std::vector<std::size_t>>(n)};
  std::vector<std::size_t> order(t);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t k = t; k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
  for (std::size_t k = 0; k < t; ++k) {
    const std::size_t owner = k < n ? k : rng.below(n + 1);
    if (owner < n) md.subsets[owner].push_back(order[k]);
  }
  for (auto& b : md.subsets) b = make_bundle(std::move(b));
  return md;
}

struct GapRow {
  std::size_t n = 0, m = 0, r = 0;
  double eps = 0.0;
  std::string kase;     // intersecting | disjoint-sw-bound | disjoint-nsw
  double value = 0.0;   // optimal NSW, or the welfare-derived NSW upper bound
  double gap = 0.0;     // value / (m / n)
};

struct GapReport {
  std::vector<GapRow> rows;
  double worst_gap = 0.0;        // largest disjoint-sw-bound gap
  double threshold = 0.0;        // 1 - (1 - 1/n)^n + eps
  bool intersecting_exact = true;  // every intersecting optimum equals m / n
  bool disjoint_bounded = true;    // every disjoint bound within threshold
};

/// Tabulates the NSW separation between totally intersecting and totally
/// disjoint inputs reduced through E.
inline GapReport gap_report(const Equicovering& e, double eps, std::size_t trials, std::uint64_t seed,
                            double budget = kDefaultBudget) {
  GapReport out;
  const double fair = static_cast<double>(e.m) / static_cast<double>(e.n);
  out.threshold = equicover_bound(e.m, e.n, eps) / static_cast<double>(e.m);
  SplitMix64 rng(seed);
  for (std::size_t k = 0; k < trials; ++k) {
    const Instance yes = reduce_multidisjointness(sample_intersecting(e.n, e.r(), rng), e);
    const double yes_nsw = brute_force_nsw(yes, budget).value;
    out.rows.push_back({e.n, e.m, e.r(), eps, "intersecting", yes_nsw, yes_nsw / fair});
    if (std::abs(yes_nsw - fair) > 1e-9 * fair) out.intersecting_exact = false;

    const Instance no = reduce_multidisjointness(sample_disjoint(e.n, e.r(), rng), e);
    const double sw_bound = brute_force_social_welfare(no, budget).value / static_cast<double>(e.n);
    const double no_nsw = brute_force_nsw(no, budget).value;
    out.rows.push_back({e.n, e.m, e.r(), eps, "disjoint-sw-bound", sw_bound, sw_bound / fair});
    out.rows.push_back({e.n, e.m, e.r(), eps, "disjoint-nsw", no_nsw, no_nsw / fair});
    out.worst_gap = std::max(out.worst_gap, sw_bound / fair);
    if (!within(sw_bound / fair, out.threshold) || !within(no_nsw / fair, out.threshold)) out.disjoint_bounded = false;
  }
  return out;
}

}  // namespace nswxos
