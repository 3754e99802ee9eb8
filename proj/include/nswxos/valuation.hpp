#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nswxos/bundle.hpp"

namespace nswxos {

/// Nonnegative additive set function over m goods.
class AdditiveFunction {
 public:
  AdditiveFunction() = default;

  explicit AdditiveFunction(std::vector<double> weights) : weights_(std::move(weights)) {
    for (std::size_t g = 0; g < weights_.size(); ++g) {
      if (!std::isfinite(weights_[g]) || weights_[g] < 0.0) {
        throw std::invalid_argument("additive weight " + std::to_string(g) +
                                    " must be finite and nonnegative");
      }
    }
  }

  static AdditiveFunction zero(std::size_t m) { return AdditiveFunction(std::vector<double>(m, 0.0)); }

  std::size_t arity() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }

  double operator()(Good g) const { return weights_.at(g); }

  double value(const Bundle& s) const {
    double total = 0.0;
    for (Good g : s) {
      if (g >= weights_.size()) throw std::out_of_range("good index " + std::to_string(g) + " out of range");
      total += weights_[g];
    }
    return total;
  }

  friend bool operator==(const AdditiveFunction&, const AdditiveFunction&) = default;

 private:
  std::vector<double> weights_;
};

/// Explicit XOS valuation: v(S) = max over the family of f(S).
class XosValuation {
 public:
  XosValuation() = default;

  explicit XosValuation(std::vector<AdditiveFunction> family) : family_(std::move(family)) {
    if (family_.empty()) throw std::invalid_argument("XOS family must be nonempty");
    for (const auto& f : family_) {
      if (f.arity() != family_.front().arity()) throw std::invalid_argument("XOS family arities disagree");
    }
  }

  /// Single-function family, i.e. an additive valuation.
  static XosValuation additive(std::vector<double> weights) {
    return XosValuation({AdditiveFunction(std::move(weights))});
  }

  std::size_t arity() const { return family_.empty() ? 0 : family_.front().arity(); }
  const std::vector<AdditiveFunction>& family() const { return family_; }

  /// Index of the family member attaining v(S); lowest index on ties.
  std::size_t argmax(const Bundle& s) const {
    std::size_t best = 0;
    double best_value = -1.0;
    for (std::size_t k = 0; k < family_.size(); ++k) {
      const double val = family_[k].value(s);
      if (val > best_value) {
        best_value = val;
        best = k;
      }
    }
    return best;
  }

  double value(const Bundle& s) const {
    double best = 0.0;
    for (const auto& f : family_) best = std::max(best, f.value(s));
    return best;
  }

  double value(Good g) const {
    if (g >= arity()) throw std::out_of_range("good index " + std::to_string(g) + " out of range");
    double best = 0.0;
    for (const auto& f : family_) best = std::max(best, f(g));
    return best;
  }

 private:
  std::vector<AdditiveFunction> family_;
};

/// Value oracle.
inline double value(const XosValuation& v, const Bundle& s) { return v.value(s); }

/// XOS oracle: the family member attaining v(S), lowest index on ties.
inline const AdditiveFunction& xos_query(const XosValuation& v, const Bundle& s) {
  return v.family()[v.argmax(s)];
}

/// Per-good prices; +infinity marks a good that may not be demanded.
class PriceVector {
 public:
  PriceVector() = default;

  explicit PriceVector(std::vector<double> prices) : prices_(std::move(prices)) {
    for (double p : prices_) {
      if (std::isnan(p) || p < 0.0) throw std::invalid_argument("prices must be nonnegative");
    }
  }

  static PriceVector zeros(std::size_t m) { return PriceVector(std::vector<double>(m, 0.0)); }

  std::size_t size() const { return prices_.size(); }
  double operator[](Good g) const { return prices_[g]; }
  const std::vector<double>& values() const { return prices_; }

  double total(const Bundle& s) const {
    double sum = 0.0;
    for (Good g : s) sum += prices_.at(g);
    return sum;
  }

  /// Prices divided by a positive scalar; infinite entries stay infinite.
  PriceVector scaled_down(double divisor) const {
    std::vector<double> out(prices_.size());
    for (std::size_t g = 0; g < prices_.size(); ++g) out[g] = prices_[g] / divisor;
    return PriceVector(std::move(out));
  }

 private:
  std::vector<double> prices_;
};

/// Demand oracle: a bundle maximizing v(S) - p(S).
///
/// For an XOS valuation the optimum is attained by some family member f at
/// {g : f(g) > p_g}. Zero-surplus goods are left out, and the first family
/// member with the highest surplus wins.
inline Bundle demand_query(const XosValuation& v, const PriceVector& p) {
  if (p.size() != v.arity()) throw std::invalid_argument("price vector arity mismatch");
  double best_surplus = 0.0;
  Bundle best;
  bool first = true;
  for (const auto& f : v.family()) {
    double surplus = 0.0;
    Bundle chosen;
    for (Good g = 0; g < f.arity(); ++g) {
      if (f(g) > p[g]) {
        surplus += f(g) - p[g];
        chosen.push_back(g);
      }
    }
    if (first || surplus > best_surplus) {
      best_surplus = surplus;
      best = std::move(chosen);
      first = false;
    }
  }
  return best;
}

/// n agents, m goods, one XOS valuation per agent.
class Instance {
 public:
  Instance() = default;

  Instance(std::size_t m, std::vector<XosValuation> valuations) : m_(m), valuations_(std::move(valuations)) {
    if (valuations_.empty()) throw std::invalid_argument("instance needs at least one agent");
    for (std::size_t i = 0; i < valuations_.size(); ++i) {
      if (valuations_[i].arity() != m_) {
        throw std::invalid_argument("agent " + std::to_string(i) + " valuation arity != m");
      }
    }
  }

  std::size_t n() const { return valuations_.size(); }
  std::size_t m() const { return m_; }
  const XosValuation& valuation(Agent i) const { return valuations_.at(i); }
  const std::vector<XosValuation>& valuations() const { return valuations_; }

  double value(Agent i, const Bundle& s) const { return valuations_.at(i).value(s); }
  double value(Agent i, Good g) const { return valuations_.at(i).value(g); }

  /// Sub-instance over a subset of agents (same goods).
  Instance restricted_to(const std::vector<Agent>& agents) const {
    std::vector<XosValuation> vals;
    vals.reserve(agents.size());
    for (Agent a : agents) vals.push_back(valuations_.at(a));
    return Instance(m_, std::move(vals));
  }

 private:
  std::size_t m_ = 0;
  std::vector<XosValuation> valuations_;
};

/// Capped valuation min(1/sqrt(n), beta * v(S)).
class CappedView {
 public:
  CappedView(const XosValuation& base, double beta, std::size_t n) : base_(&base), beta_(beta), n_(n) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive and finite");
    if (n == 0) throw std::invalid_argument("agent count must be positive");
  }

  const XosValuation& base() const { return *base_; }
  double beta() const { return beta_; }
  std::size_t n() const { return n_; }
  double cap() const { return 1.0 / std::sqrt(static_cast<double>(n_)); }

  double operator()(const Bundle& s) const { return std::min(cap(), beta_ * base_->value(s)); }
  double operator()(Good g) const { return std::min(cap(), beta_ * base_->value(g)); }

 private:
  const XosValuation* base_;
  double beta_;
  std::size_t n_;
};

inline double capped_value(const CappedView& cv, const Bundle& s) { return cv(s); }

}  // namespace nswxos
