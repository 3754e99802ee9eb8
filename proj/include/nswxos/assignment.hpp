#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace nswxos {

/// Two-level objective: first the number of positive factors, then the sum of
/// their logs. Ordered lexicographically; forms an ordered abelian group, which
/// is all the Hungarian method needs.
struct LexScore {
  std::int64_t count = 0;
  double log = 0.0;

  friend LexScore operator+(LexScore a, LexScore b) { return {a.count + b.count, a.log + b.log}; }
  friend LexScore operator-(LexScore a, LexScore b) { return {a.count - b.count, a.log - b.log}; }
  LexScore operator-() const { return {-count, -log}; }
  LexScore& operator+=(LexScore b) { count += b.count; log += b.log; return *this; }
  LexScore& operator-=(LexScore b) { count -= b.count; log -= b.log; return *this; }
  friend bool operator<(LexScore a, LexScore b) {
    return a.count != b.count ? a.count < b.count : a.log < b.log;
  }

  /// Score of a single factor: (1, log x) if x > 0, else (0, 0).
  static LexScore of(double x) { return x > 0.0 ? LexScore{1, std::log(x)} : LexScore{}; }
};

inline bool nearly_equal(LexScore a, LexScore b, double scale = 1.0) {
  return a.count == b.count && std::abs(a.log - b.log) <= 1e-9 * std::max(1.0, scale);
}

namespace detail {

inline constexpr std::int64_t kForbidden = std::int64_t{1} << 40;
inline constexpr std::int64_t kInfinity = std::int64_t{1} << 52;

struct AssignmentSolution {
  std::vector<std::size_t> col_of_row;
  LexScore total;
  std::vector<LexScore> row_potential;
  std::vector<LexScore> col_potential;
};

/// Minimum-cost assignment of every row to a distinct column (rows <= cols),
/// Hungarian method with potentials. Forbidden cells carry count kForbidden.
inline AssignmentSolution min_cost_assignment(const std::vector<std::vector<LexScore>>& cost, std::size_t cols) {
  const std::size_t n = cost.size();
  if (n > cols) throw std::invalid_argument("assignment needs rows <= cols");
  const LexScore inf{kInfinity, 0.0};
  std::vector<LexScore> u(n + 1), v(cols + 1);
  std::vector<std::size_t> p(cols + 1, 0), way(cols + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<LexScore> minv(cols + 1, inf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      LexScore delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const LexScore cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  AssignmentSolution sol;
  sol.col_of_row.assign(n, 0);
  for (std::size_t j = 1; j <= cols; ++j) {
    if (p[j] != 0) sol.col_of_row[p[j] - 1] = j - 1;
  }
  for (std::size_t i = 0; i < n; ++i) sol.total += cost[i][sol.col_of_row[i]];
  sol.row_potential.assign(u.begin() + 1, u.end());
  sol.col_potential.assign(v.begin() + 1, v.end());
  return sol;
}

}  // namespace detail

/// Assignment of rows (agents) to columns (goods) maximizing the two-level
/// product objective over per-row outcomes.
///
/// Row i matched to column g yields outcome `matched[i][g]`; left unmatched it
/// yields `unmatched[i]`. Pairs with `matched[i][g] <= 0` are never used. The
/// objective is LexScore summed over rows: maximize the number of positive
/// outcomes, then the sum of their logs.
///
/// Among optimal assignments (up to 1e-9 relative slack on the log part) the
/// result is the lexicographically smallest one: row 0 takes the lowest column
/// it can take in some optimum, then row 1, and so on; "unmatched" ranks after
/// every column.
struct ProductAssignment {
  std::vector<std::optional<std::size_t>> col_of_row;
  LexScore objective;
};

inline ProductAssignment max_product_assignment(const std::vector<std::vector<double>>& matched,
                                                const std::vector<double>& unmatched) {
  const std::size_t n = matched.size();
  if (unmatched.size() != n) throw std::invalid_argument("unmatched outcome count != rows");
  const std::size_t k = n == 0 ? 0 : matched.front().size();
  for (const auto& row : matched) {
    if (row.size() != k) throw std::invalid_argument("ragged value matrix");
  }
  ProductAssignment out;
  out.col_of_row.assign(n, std::nullopt);
  if (n == 0) return out;

  // Columns [0, k) are goods, [k, k + n) are interchangeable "unmatched" slots.
  const std::size_t cols = k + n;
  const LexScore forbidden{detail::kForbidden, 0.0};
  std::vector<std::vector<LexScore>> base_cost(n, std::vector<LexScore>(cols));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t g = 0; g < k; ++g) {
      const double x = matched[i][g];
      if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("values must be finite and nonnegative");
      base_cost[i][g] = x > 0.0 ? -LexScore::of(x) : forbidden;
    }
    for (std::size_t d = k; d < cols; ++d) base_cost[i][d] = -LexScore::of(unmatched[i]);
  }

  auto cost = base_cost;
  auto current = detail::min_cost_assignment(cost, cols);
  const LexScore optimum = current.total;
  const double scale = std::abs(optimum.log) + 1.0;

  // Pin rows one at a time to the lowest column that keeps the optimum.
  auto pin = [&](std::size_t row, std::size_t col) {
    for (std::size_t j = 0; j < cols; ++j) {
      const bool keep = col < k ? j == col : j >= k;
      if (!keep) cost[row][j] = forbidden;
    }
    if (col < k) {
      for (std::size_t r = 0; r < n; ++r) {
        if (r != row) cost[r][col] = forbidden;
      }
    }
  };

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cur = std::min(current.col_of_row[i], k);
    bool moved = false;
    for (std::size_t c = 0; c < cur && !moved; ++c) {
      if (cost[i][c].count >= detail::kForbidden) continue;
      const LexScore reduced = cost[i][c] - current.row_potential[i] - current.col_potential[c];
      const double mag = std::abs(cost[i][c].log) + std::abs(current.row_potential[i].log) +
                         std::abs(current.col_potential[c].log);
      if (reduced.count != 0 || std::abs(reduced.log) > 1e-9 * std::max(1.0, mag)) continue;
      const auto saved = cost;
      pin(i, c);
      auto trial = detail::min_cost_assignment(cost, cols);
      if (nearly_equal(trial.total, optimum, scale)) {
        current = std::move(trial);
        moved = true;
      } else {
        cost = saved;
      }
    }
    if (!moved) pin(i, cur);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (current.col_of_row[i] < k) out.col_of_row[i] = current.col_of_row[i];
  }
  LexScore total;
  for (std::size_t i = 0; i < n; ++i) {
    total += LexScore::of(out.col_of_row[i] ? matched[i][*out.col_of_row[i]] : unmatched[i]);
  }
  out.objective = total;
  return out;
}

}  // namespace nswxos
