#pragma once

#include <openssl/evp.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nswxos/bundle.hpp"
#include "nswxos/nsw_solver.hpp"
#include "nswxos/valuation.hpp"

namespace nswxos {

using Json = nlohmann::json;

inline constexpr const char* kInstanceFormat = "nswxos-instance";
inline constexpr const char* kReportFormat = "nswxos-report";
inline constexpr int kFormatVersion = 1;

/// Schema or syntax problem in an input file; `what()` names the location.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 17 significant digits: enough to round-trip any double.
inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline bool is_scalar_array(const Json& j) {
  for (const auto& e : j) {
    if (e.is_structured()) return false;
  }
  return true;
}

inline void write_canonical(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, val] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(key).dump() + ": ";
        write_canonical(val, out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (is_scalar_array(j)) {
        out += "[";
        for (std::size_t k = 0; k < j.size(); ++k) {
          if (k) out += ", ";
          write_canonical(j[k], out, indent + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out += ",\n";
        out += inner;
        write_canonical(j[k], out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) throw std::invalid_argument("non-finite number in output");
      out += format_number(x);
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

/// Sorted keys, two-space indent, scalar arrays inline, floats via format_number.
inline std::string canonical_dump(const Json& j) {
  std::string out;
  detail::write_canonical(j, out, 0);
  out += "\n";
  return out;
}

/// Lowercase hex SHA-256.
inline std::string sha256_hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) {
    hex.push_back(kHex[digest[k] >> 4]);
    hex.push_back(kHex[digest[k] & 0xF]);
  }
  return hex;
}

struct InstanceMetadata {
  std::optional<std::string> name;
  std::optional<std::string> generator;
  std::optional<std::uint64_t> seed;

  bool empty() const { return !name && !generator && !seed; }
  friend bool operator==(const InstanceMetadata&, const InstanceMetadata&) = default;
};

struct InstanceFile {
  Instance instance;
  InstanceMetadata metadata;
};

inline Json instance_to_json(const Instance& inst, const InstanceMetadata& meta = {}) {
  Json agents = Json::array();
  for (const auto& v : inst.valuations()) {
    Json family = Json::array();
    for (const auto& f : v.family()) family.push_back(f.weights());
    agents.push_back(std::move(family));
  }
  Json j = {{"format", kInstanceFormat},
            {"version", kFormatVersion},
            {"n", inst.n()},
            {"m", inst.m()},
            {"agents", std::move(agents)}};
  if (!meta.empty()) {
    Json md = Json::object();
    if (meta.name) md["name"] = *meta.name;
    if (meta.generator) md["generator"] = *meta.generator;
    if (meta.seed) md["seed"] = *meta.seed;
    j["metadata"] = std::move(md);
  }
  return j;
}

inline std::string emit_instance(const Instance& inst, const InstanceMetadata& meta = {}) {
  return canonical_dump(instance_to_json(inst, meta));
}

inline std::string emit_instance(const InstanceFile& file) { return emit_instance(file.instance, file.metadata); }

/// Digest of the canonical emission of an instance (metadata excluded).
inline std::string instance_digest(const Instance& inst) { return sha256_hex(emit_instance(inst)); }

namespace detail {

inline std::size_t require_count(const Json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  const Json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ParseError(std::string("field '") + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

inline void reject_unknown(const Json& j, const std::vector<std::string>& allowed, const std::string& where) {
  for (const auto& [key, val] : j.items()) {
    bool ok = false;
    for (const auto& a : allowed) ok = ok || a == key;
    if (!ok) throw ParseError(where + ": unknown field '" + key + "'");
  }
}

}  // namespace detail

inline InstanceFile instance_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("instance: top level must be an object");
  detail::reject_unknown(j, {"format", "version", "n", "m", "agents", "metadata"}, "instance");
  if (!j.contains("format") || j.at("format") != kInstanceFormat) {
    throw ParseError(std::string("instance: 'format' must be \"") + kInstanceFormat + "\"");
  }
  if (!j.contains("version") || j.at("version") != kFormatVersion) throw ParseError("instance: unsupported 'version'");
  const std::size_t n = detail::require_count(j, "n");
  const std::size_t m = detail::require_count(j, "m");
  if (n == 0) throw ParseError("instance: 'n' must be at least 1");
  if (!j.contains("agents") || !j.at("agents").is_array()) throw ParseError("instance: 'agents' must be an array");
  const Json& agents = j.at("agents");
  if (agents.size() != n) throw ParseError("instance: 'agents' has " + std::to_string(agents.size()) + " entries, n = " + std::to_string(n));

  std::vector<XosValuation> vals;
  vals.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string where = "agents[" + std::to_string(i) + "]";
    const Json& fam = agents[i];
    if (!fam.is_array() || fam.empty()) throw ParseError(where + ": must be a nonempty array of additive functions");
    std::vector<AdditiveFunction> family;
    for (std::size_t k = 0; k < fam.size(); ++k) {
      const std::string fwhere = where + "[" + std::to_string(k) + "]";
      const Json& row = fam[k];
      if (!row.is_array()) throw ParseError(fwhere + ": must be an array of weights");
      if (row.size() != m) {
        throw ParseError(fwhere + ": has " + std::to_string(row.size()) + " weights, m = " + std::to_string(m));
      }
      std::vector<double> w(m);
      for (std::size_t g = 0; g < m; ++g) {
        if (!row[g].is_number()) throw ParseError(fwhere + "[" + std::to_string(g) + "]: not a number");
        w[g] = row[g].get<double>();
        if (!std::isfinite(w[g]) || w[g] < 0.0) {
          throw ParseError(fwhere + "[" + std::to_string(g) + "]: weight must be finite and nonnegative");
        }
      }
      family.emplace_back(std::move(w));
    }
    vals.emplace_back(std::move(family));
  }

  InstanceFile out{Instance(m, std::move(vals)), {}};
  if (j.contains("metadata")) {
    const Json& md = j.at("metadata");
    if (!md.is_object()) throw ParseError("metadata: must be an object");
    detail::reject_unknown(md, {"name", "generator", "seed"}, "metadata");
    if (md.contains("name")) {
      if (!md.at("name").is_string()) throw ParseError("metadata.name: must be a string");
      out.metadata.name = md.at("name").get<std::string>();
    }
    if (md.contains("generator")) {
      if (!md.at("generator").is_string()) throw ParseError("metadata.generator: must be a string");
      out.metadata.generator = md.at("generator").get<std::string>();
    }
    if (md.contains("seed")) {
      if (!md.at("seed").is_number_unsigned() && !(md.at("seed").is_number_integer() && md.at("seed").get<std::int64_t>() >= 0)) {
        throw ParseError("metadata.seed: must be a nonnegative integer");
      }
      out.metadata.seed = md.at("seed").get<std::uint64_t>();
    }
  }
  return out;
}

inline InstanceFile parse_instance(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError("instance: syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return instance_from_json(j);
}

// ---------------------------------------------------------------------------
// Solve reports

namespace detail {

inline Json matching_json(const MatchingResult& r) {
  Json assignment = Json::array();
  for (const auto& a : r.assignment) assignment.push_back(a ? Json(*a) : Json(nullptr));
  return {{"assignment", std::move(assignment)},
          {"product_log", r.product_log},
          {"positive_count", r.positive_count}};
}

inline Json allocation_json(const Allocation& a) {
  Json out = Json::array();
  for (const auto& b : a.bundles) out.push_back(b);
  return out;
}

}  // namespace detail

inline Json report_to_json(const Instance& inst, const SolveResult& result, bool topup) {
  const SolveTrace& tr = result.trace;
  Json tau = Json::array();
  for (const auto& t : tr.tau) tau.push_back(detail::matching_json(t));
  Json betas = Json::array();
  for (const auto& b : tr.betas) betas.push_back(b ? Json(*b) : Json(nullptr));
  Json steps = Json::array();
  for (const auto& s : tr.welfare_steps) {
    steps.push_back({{"iteration", s.iteration},
                     {"welfare_before", s.welfare_before},
                     {"welfare_after", s.welfare_after},
                     {"agent", s.agent},
                     {"prefix_size", s.prefix_size}});
  }
  const auto values = agent_values(inst, result.allocation);
  Json trace = {{"reserved", tr.reserved},
                {"tau", std::move(tau)},
                {"pi", detail::matching_json(tr.pi)},
                {"knife_pool", tr.knife_pool},
                {"welfare_pool", tr.welfare_pool},
                {"knife", detail::allocation_json(tr.knife)},
                {"betas", std::move(betas)},
                {"welfare", detail::allocation_json(tr.welfare)},
                {"mu", detail::matching_json(tr.mu)},
                {"excluded", tr.excluded},
                {"topup_goods", tr.topup_goods}};
  return {{"format", kReportFormat},
          {"version", kFormatVersion},
          {"instance_digest", instance_digest(inst)},
          {"seed", tr.seed},
          {"topup", topup},
          {"allocation", detail::allocation_json(result.allocation)},
          {"values", values},
          {"nsw", nsw_of_values(values)},
          {"trace", std::move(trace)},
          {"capped_iterations", std::move(steps)}};
}

inline std::string emit_report(const Instance& inst, const SolveResult& result, bool topup) {
  return canonical_dump(report_to_json(inst, result, topup));
}

/// Recomputes per-agent values and NSW from the instance and the recorded
/// allocation; true when every number matches within kRelTol and the digest
/// belongs to this instance.
inline bool report_consistent(const Instance& inst, const Json& report) {
  if (report.value("instance_digest", std::string{}) != instance_digest(inst)) return false;
  const Json& alloc = report.at("allocation");
  const Json& values = report.at("values");
  if (alloc.size() != inst.n() || values.size() != inst.n()) return false;
  Allocation a(inst.n());
  for (Agent i = 0; i < inst.n(); ++i) a[i] = alloc[i].get<std::vector<Good>>();
  if (!a.pairwise_disjoint()) return false;
  auto close = [](double x, double y) { return std::abs(x - y) <= kRelTol * std::max(1.0, std::abs(y)); };
  for (Agent i = 0; i < inst.n(); ++i) {
    if (!close(values[i].get<double>(), inst.value(i, a[i]))) return false;
  }
  return close(report.at("nsw").get<double>(), nsw(inst, a));
}

}  // namespace nswxos
