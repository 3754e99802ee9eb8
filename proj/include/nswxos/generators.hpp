#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nswxos/bundle.hpp"
#include "nswxos/hardness.hpp"
#include "nswxos/io.hpp"
#include "nswxos/rng.hpp"
#include "nswxos/valuation.hpp"

namespace nswxos {

enum class GeneratorKind { kUniformAdditive, kKXosRandom, kP1P2Witness, kEquicoverGadget };

inline std::optional<GeneratorKind> generator_from_name(const std::string& name) {
  if (name == "uniform-additive") return GeneratorKind::kUniformAdditive;
  if (name == "k-xos-random") return GeneratorKind::kKXosRandom;
  if (name == "p1p2-witness") return GeneratorKind::kP1P2Witness;
  if (name == "equicover-gadget") return GeneratorKind::kEquicoverGadget;
  return std::nullopt;
}

inline std::string generator_name(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kUniformAdditive: return "uniform-additive";
    case GeneratorKind::kKXosRandom: return "k-xos-random";
    case GeneratorKind::kP1P2Witness: return "p1p2-witness";
    case GeneratorKind::kEquicoverGadget: return "equicover-gadget";
  }
  return "unknown";
}

/// Parameters shared by all generator kinds; each kind reads what it needs.
///   uniform-additive   n >= 1, m >= 0; weights uniform in (0, 1]
///   k-xos-random       n, m, k >= 1 functions per agent; each weight is
///                      nonzero with probability `density`, then uniform in (0, 1]
///   p1p2-witness       n; m is forced to 4n
///   equicover-gadget   n | m, r >= 1; `intersecting` picks the input family
struct GeneratorParams {
  std::size_t n = 2;
  std::size_t m = 4;
  std::size_t k = 3;
  std::size_t r = 2;
  double density = 1.0;
  bool intersecting = true;
};

/// Each agent owns four dedicated goods worth 1/(4 sqrt n) apiece. With unit
/// betas, O_i = own goods gives v^_i(O_i) = 1/sqrt n for all i, so the
/// welfare over all agents is sqrt n and no good exceeds 1/(2 sqrt n).
struct P1P2Witness {
  Instance instance;
  Allocation reference;            // O
  std::vector<Agent> agents;       // Abar
  std::vector<double> betas;
};

inline P1P2Witness p1p2_witness(std::size_t n) {
  if (n == 0) throw std::invalid_argument("p1p2-witness needs n >= 1");
  const std::size_t m = 4 * n;
  const double w = 1.0 / (4.0 * std::sqrt(static_cast<double>(n)));
  P1P2Witness out;
  out.reference = Allocation(n);
  std::vector<XosValuation> vals;
  for (Agent i = 0; i < n; ++i) {
    std::vector<double> weights(m, 0.0);
    for (Good g = 4 * i; g < 4 * i + 4; ++g) {
      weights[g] = w;
      out.reference[i].push_back(g);
    }
    vals.push_back(XosValuation::additive(std::move(weights)));
    out.agents.push_back(i);
  }
  out.instance = Instance(m, std::move(vals));
  out.betas.assign(n, 1.0);
  return out;
}

inline Instance uniform_additive(std::size_t n, std::size_t m, SplitMix64& rng) {
  std::vector<XosValuation> vals;
  for (Agent i = 0; i < n; ++i) {
    std::vector<double> w(m);
    for (double& x : w) x = rng.uniform_open_closed();
    vals.push_back(XosValuation::additive(std::move(w)));
  }
  return Instance(m, std::move(vals));
}

inline Instance k_xos_random(std::size_t n, std::size_t m, std::size_t k, double density, SplitMix64& rng) {
  if (k == 0) throw std::invalid_argument("k-xos-random needs k >= 1");
  if (!(density >= 0.0 && density <= 1.0)) throw std::invalid_argument("density must lie in [0, 1]");
  std::vector<XosValuation> vals;
  for (Agent i = 0; i < n; ++i) {
    std::vector<AdditiveFunction> family;
    for (std::size_t f = 0; f < k; ++f) {
      std::vector<double> w(m, 0.0);
      for (double& x : w) {
        const bool keep = rng.uniform01() < density;
        const double draw = rng.uniform_open_closed();
        if (keep) x = draw;
      }
      family.emplace_back(std::move(w));
    }
    vals.emplace_back(std::move(family));
  }
  return Instance(m, std::move(vals));
}

inline InstanceFile generate(GeneratorKind kind, const GeneratorParams& params, std::uint64_t seed) {
  if (params.n == 0) throw std::invalid_argument("generator needs n >= 1");
  SplitMix64 rng(seed);
  InstanceFile out;
  switch (kind) {
    case GeneratorKind::kUniformAdditive:
      out.instance = uniform_additive(params.n, params.m, rng);
      break;
    case GeneratorKind::kKXosRandom:
      out.instance = k_xos_random(params.n, params.m, params.k, params.density, rng);
      break;
    case GeneratorKind::kP1P2Witness:
      out.instance = p1p2_witness(params.n).instance;
      break;
    case GeneratorKind::kEquicoverGadget: {
      if (params.r == 0) throw std::invalid_argument("equicover-gadget needs r >= 1");
      const auto e = build_equicovering(params.m, params.n, params.r, seed);
      SplitMix64 pick(seed ^ 0x5DEECE66DULL);
      const auto md = params.intersecting ? sample_intersecting(params.n, params.r, pick)
                                          : sample_disjoint(params.n, params.r, pick);
      out.instance = reduce_multidisjointness(md, e);
      break;
    }
  }
  out.metadata.generator = generator_name(kind);
  out.metadata.seed = seed;
  return out;
}

}  // namespace nswxos
