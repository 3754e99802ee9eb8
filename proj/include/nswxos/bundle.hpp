#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <vector>

namespace nswxos {

using Good = std::size_t;
using Agent = std::size_t;

/// A set of goods, stored as a strictly increasing sequence of indices.
using Bundle = std::vector<Good>;

/// Relative slack applied to every threshold comparison in the library.
inline constexpr double kRelTol = 1e-9;

/// `value >= threshold`, accepting a relative shortfall of kRelTol.
inline bool meets(double value, double threshold) {
  return value >= threshold * (1.0 - kRelTol);
}

/// `value <= threshold`, accepting a relative excess of kRelTol.
inline bool within(double value, double threshold) {
  return value <= threshold * (1.0 + kRelTol);
}

inline Bundle make_bundle(std::vector<Good> goods) {
  std::sort(goods.begin(), goods.end());
  goods.erase(std::unique(goods.begin(), goods.end()), goods.end());
  return goods;
}

inline Bundle range_bundle(std::size_t m) {
  Bundle all(m);
  for (std::size_t g = 0; g < m; ++g) all[g] = g;
  return all;
}

inline bool contains(const Bundle& s, Good g) {
  return std::binary_search(s.begin(), s.end(), g);
}

inline Bundle unite(const Bundle& a, const Bundle& b) {
  Bundle out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline Bundle unite(const Bundle& a, Good g) {
  Bundle out = a;
  auto it = std::lower_bound(out.begin(), out.end(), g);
  if (it == out.end() || *it != g) out.insert(it, g);
  return out;
}

inline Bundle difference(const Bundle& a, const Bundle& b) {
  Bundle out;
  out.reserve(a.size());
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline Bundle intersect(const Bundle& a, const Bundle& b) {
  Bundle out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline bool disjoint(const Bundle& a, const Bundle& b) {
  return intersect(a, b).empty();
}

/// Allocation of goods to agents. Bundles are pairwise disjoint; goods may be left out.
struct Allocation {
  std::vector<Bundle> bundles;

  Allocation() = default;
  explicit Allocation(std::size_t n) : bundles(n) {}

  std::size_t agents() const { return bundles.size(); }
  const Bundle& operator[](Agent i) const { return bundles[i]; }
  Bundle& operator[](Agent i) { return bundles[i]; }

  Bundle allocated() const {
    Bundle all;
    for (const auto& b : bundles) all = unite(all, b);
    return all;
  }

  bool pairwise_disjoint() const {
    std::size_t total = 0;
    for (const auto& b : bundles) total += b.size();
    return allocated().size() == total;
  }

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

}  // namespace nswxos
