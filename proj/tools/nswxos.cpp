// nswxos command-line front end.
//
// Exit codes: 0 success, 1 a verification failed, 2 usage or input error.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "nswxos/nswxos.hpp"

namespace fs = std::filesystem;
using namespace nswxos;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::optional<std::string>& path, const std::string& text) {
  if (!path) {
    std::cout << text;
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + *path);
  out << text;
}

InstanceFile load_instance(const std::string& path) {
  try {
    return parse_instance(read_file(path));
  } catch (const ParseError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

unsigned default_threads() {
  if (const char* env = std::getenv("NSWXOS_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------
// solve / exact

struct SolveArgs {
  std::string instance;
  std::uint64_t seed = 0;
  bool topup = false;
  std::optional<std::string> out;
};

int run_solve(const SolveArgs& a) {
  const auto file = load_instance(a.instance);
  const auto result = solve(file.instance, a.seed, SolveOptions{a.topup});
  write_output(a.out, emit_report(file.instance, result, a.topup));
  return kOk;
}

struct ExactArgs {
  std::string instance;
  bool capped = false;
  std::vector<double> betas;
  double budget = kDefaultBudget;
};

int run_exact(const ExactArgs& a) {
  const auto file = load_instance(a.instance);
  const Instance& inst = file.instance;
  ExactSolution sol;
  Json j;
  if (a.capped) {
    std::vector<double> betas = a.betas;
    if (betas.empty()) betas.assign(inst.n(), 1.0);
    if (betas.size() != inst.n()) throw UsageError("--betas needs one value per agent");
    for (double b : betas) {
      if (!(b > 0.0) || !std::isfinite(b)) throw UsageError("--betas must be positive");
    }
    sol = brute_force_capped_sw(inst, betas, a.budget);
    j["objective"] = "capped-social-welfare";
    j["betas"] = betas;
  } else {
    sol = brute_force_nsw(inst, a.budget);
    j["objective"] = "nsw";
  }
  Json alloc = Json::array();
  for (const auto& b : sol.allocation.bundles) alloc.push_back(b);
  j["allocation"] = std::move(alloc);
  j["value"] = sol.value;
  j["instance_digest"] = instance_digest(inst);
  std::cout << canonical_dump(j);
  return kOk;
}

// ---------------------------------------------------------------------------
// verify suites

struct VerifyArgs {
  std::string suite;
  std::optional<std::size_t> n;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
};

Instance random_positive_instance(SplitMix64& rng, std::size_t n, std::size_t m, std::size_t max_family) {
  GeneratorParams p;
  p.n = n;
  p.m = m;
  p.k = 1 + rng.below(max_family);
  return generate(GeneratorKind::kKXosRandom, p, rng.next()).instance;
}

std::vector<Good> gstar_of(const Instance& inst, const Allocation& opt) {
  std::vector<Good> g(inst.n());
  for (Agent i = 0; i < inst.n(); ++i) g[i] = best_single_good(inst, i, opt[i]).value_or(0);
  return g;
}

int report(const std::string& suite, std::size_t runs, std::size_t failures, const std::string& extra = "") {
  std::cout << suite << ": runs " << runs << " failures " << failures << extra << "\n";
  return failures == 0 ? kOk : kFailed;
}

int verify_matchhigh_suite(const VerifyArgs& a) {
  const std::size_t n = a.n.value_or(3);
  const std::size_t rounds = matching_rounds(n);
  // n (ceil(log2 n) + 1) + n goods.
  const std::size_t m = n * (static_cast<std::size_t>(std::bit_width(n - 1)) + 1) + n;
  SplitMix64 rng(a.seed);
  std::size_t failures = 0;
  for (std::size_t t = 0; t < a.trials; ++t) {
    const Instance inst = random_positive_instance(rng, n, m, 3);
    const Bundle reserved = repeated_matchings(inst, range_bundle(m), rounds).reserved;
    const auto opt = brute_force_nsw(inst, 1e9);
    if (!verify_matchhigh(inst, reserved, gstar_of(inst, opt.allocation))) ++failures;
  }
  return report("matchhigh", a.trials, failures);
}

int verify_movingknife_suite(const VerifyArgs& a) {
  SplitMix64 rng(a.seed);
  std::size_t failures = 0;
  for (std::size_t t = 0; t < a.trials; ++t) {
    const std::size_t n = a.n.value_or(1 + rng.below(4));
    GeneratorParams p;
    p.n = n;
    p.m = rng.below(160);
    p.k = 1 + rng.below(3);
    p.density = 0.3 + 0.7 * rng.uniform01();
    const Instance inst = generate(GeneratorKind::kKXosRandom, p, rng.next()).instance;
    Bundle pool;
    for (Good g = 0; g < p.m; ++g) {
      if (rng.coin()) pool.push_back(g);
    }
    const auto r = discrete_moving_knife(inst, pool);
    bool ok = r.bundles.pairwise_disjoint() && r.bundles.allocated() == pool;
    for (Agent i = 0; i < n && ok; ++i) {
      if (!r.assigned_in_sweep[i]) continue;
      ok = meets(inst.value(i, intersect(r.bundles[i], r.supports[i])),
                 inst.value(i, r.supports[i]) / (16.0 * static_cast<double>(n)));
    }
    if (!ok) ++failures;
  }
  return report("movingknife", a.trials, failures);
}

int verify_cappedwelfare_suite(const VerifyArgs& a) {
  std::vector<std::size_t> sizes;
  if (a.n) {
    sizes = {*a.n};
  } else {
    sizes = {4, 9, 16};
  }
  std::size_t failures = 0;
  std::size_t runs = 0;
  std::ostringstream detail_line;
  for (std::size_t n : sizes) {
    const auto w = p1p2_witness(n);
    const auto views = make_views(w.instance, w.betas);
    double ref = 0.0;
    for (Agent i : w.agents) ref += views[i](w.reference[i]);
    const double root = std::sqrt(static_cast<double>(n));
    bool cap_slack = true;
    const auto r = capped_social_welfare(w.instance, range_bundle(w.instance.m()), w.betas,
                                         [&](const WelfareSnapshot& s) {
                                           for (Agent j = 0; j < n; ++j) {
                                             const double raw = s.views[j].beta() * w.instance.value(j, s.state.bundles[j]);
                                             if (!(raw < 1.0 / root * (1 + kRelTol))) cap_slack = false;
                                           }
                                         });
    bool ok = meets(r.welfare, 2.0 / 25.0 * ref) && r.steps.size() <= 225 * n && cap_slack;
    for (const auto& s : r.steps) ok = ok && meets(s.welfare_after - s.welfare_before, 1.0 / (225.0 * root));
    ++runs;
    if (!ok) ++failures;
    detail_line << " n" << n << "=" << format_number(r.welfare) << "/" << format_number(2.0 / 25.0 * ref);
  }
  return report("cappedwelfare", runs, failures, detail_line.str());
}

int verify_rematch_suite(const VerifyArgs& a) {
  SplitMix64 rng(a.seed);
  std::size_t failures = 0;
  std::size_t checked = 0;
  for (std::size_t t = 0; t < a.trials; ++t) {
    const std::size_t n = a.n.value_or(1 + rng.below(3));
    const std::size_t m = std::min<std::size_t>(8, n + rng.below(9 - n));
    const Instance inst = random_positive_instance(rng, n, m, 3);
    const auto opt = brute_force_nsw(inst);
    const auto gstar = gstar_of(inst, opt.allocation);
    const auto res = solve(inst, rng.next());
    if (!verify_matchhigh(inst, res.trace.reserved, gstar)) continue;
    ++checked;
    const auto [q, qstar] = rematch_bound_check(inst, res.trace, gstar);
    if (!meets(q, 0.5 * qstar)) ++failures;
  }
  return report("rematch", checked, failures);
}

int verify_concentration_suite(const VerifyArgs& a) {
  const std::size_t n = a.n.value_or(256);
  const std::size_t trials = std::max<std::size_t>(a.trials, 1);
  // Equal goods, as many as needed for each to be worth at most 1/sqrt(n).
  const auto goods = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  const XosValuation v = XosValuation::additive(std::vector<double>(goods, 1.0));
  const auto out = concentration_experiment(v, range_bundle(goods), n, trials, a.seed);
  const double slack = 3.0 * std::sqrt(out.bound * (1.0 - out.bound) / static_cast<double>(trials));
  const bool ok = out.frequency <= out.bound + slack;
  std::cout << "concentration: n " << n << " goods " << goods << " trials " << trials << " frequency "
            << format_number(out.frequency) << " bound " << format_number(out.bound) << " slack "
            << format_number(slack) << "\n";
  return ok ? kOk : kFailed;
}

int run_verify(const VerifyArgs& a) {
  if (a.suite == "matchhigh") return verify_matchhigh_suite(a);
  if (a.suite == "movingknife") return verify_movingknife_suite(a);
  if (a.suite == "cappedwelfare") return verify_cappedwelfare_suite(a);
  if (a.suite == "rematch") return verify_rematch_suite(a);
  if (a.suite == "concentration") return verify_concentration_suite(a);
  throw UsageError("unknown suite " + a.suite);
}

// ---------------------------------------------------------------------------
// gadget

struct GadgetArgs {
  std::size_t n = 2;
  std::size_t m = 4;
  std::size_t r = 2;
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::string verify = "exhaustive";
  bool gap = false;
  std::size_t trials = 4;
  std::size_t retries = 1000;
};

VerifyMode parse_verify_mode(const std::string& text, std::uint64_t seed) {
  if (text == "exhaustive") return VerifyMode::all();
  const std::string prefix = "sampled=";
  if (text.rfind(prefix, 0) == 0) {
    const std::string k = text.substr(prefix.size());
    if (k.empty() || k.find_first_not_of("0123456789") != std::string::npos) {
      throw UsageError("--verify sampled=K needs a positive integer K");
    }
    return VerifyMode::sampled(std::stoull(k), seed);
  }
  if (text == "sampled") return VerifyMode::sampled(VerifyMode{}.samples, seed);
  throw UsageError("--verify must be exhaustive or sampled=K");
}

int run_gadget(const GadgetArgs& a) {
  if (a.n == 0 || a.m % a.n != 0) throw UsageError("--n must divide --m");
  if (a.r == 0) throw UsageError("--r must be positive");
  const VerifyMode mode = parse_verify_mode(a.verify, a.seed);
  const auto found = find_equicovering(a.m, a.n, a.r, a.eps, a.seed, a.retries, mode);
  if (!found) {
    std::cout << "equicovering: none verified in " << a.retries + 1 << " seeds from " << a.seed << "\n";
    return kFailed;
  }
  const auto& [e, used_seed] = *found;
  const auto verdict = verify_equicovering(e, a.eps, mode);
  std::cout << "equicovering: seed " << used_seed << " worst_union " << verdict.worst_union << " bound "
            << format_number(verdict.bound) << " tuples " << verdict.tuples_checked << "\n";
  if (!a.gap) return kOk;
  const auto rep = gap_report(e, a.eps, a.trials, used_seed, 1e9);
  std::cout << "n,m,r,eps,case,value,gap\n";
  for (const auto& row : rep.rows) {
    std::cout << row.n << ',' << row.m << ',' << row.r << ',' << format_number(row.eps) << ',' << row.kase << ','
              << format_number(row.value) << ',' << format_number(row.gap) << "\n";
  }
  std::cout << "gap " << format_number(rep.worst_gap) << "\n";
  std::cout << "threshold " << format_number(rep.threshold) << "\n";
  return rep.intersecting_exact && rep.disjoint_bounded ? kOk : kFailed;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::string dir;
  std::size_t seeds = 5;
  unsigned threads = 0;
  double budget = kDefaultBudget;
};

int run_bench(const BenchArgs& a) {
  if (!fs::is_directory(a.dir)) throw UsageError(a.dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<InstanceFile> instances;
  for (const auto& f : files) instances.push_back(load_instance(f.string()));

  struct Row {
    double value = 0.0;
    std::optional<double> opt;
  };
  std::vector<std::optional<double>> opts(instances.size());
  std::vector<Row> rows(instances.size() * a.seeds);
  const std::size_t jobs = rows.size() + instances.size();
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job; (job = next.fetch_add(1)) < jobs;) {
      if (job < instances.size()) {
        try {
          opts[job] = brute_force_nsw(instances[job].instance, a.budget).value;
        } catch (const BudgetExceeded&) {
        }
      } else {
        const std::size_t k = job - instances.size();
        const auto& inst = instances[k / a.seeds].instance;
        rows[k].value = nsw(inst, solve(inst, k % a.seeds).allocation);
      }
    }
  };
  const unsigned threads = a.threads > 0 ? a.threads : default_threads();
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::cout << "instance,seed,nsw,opt,ratio\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t idx = k / a.seeds;
    const auto& opt = opts[idx];
    std::cout << files[idx].filename().string() << ',' << k % a.seeds << ',' << format_number(rows[k].value) << ',';
    if (opt) std::cout << format_number(*opt);
    std::cout << ',';
    if (opt && *opt > 0.0) std::cout << format_number(rows[k].value / *opt);
    std::cout << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string kind;
  GeneratorParams params;
  bool disjoint = false;
  std::uint64_t seed = 0;
  std::optional<std::string> name;
  std::optional<std::string> out;
};

int run_generate(const GenerateArgs& a) {
  const auto kind = generator_from_name(a.kind);
  if (!kind) throw UsageError("unknown generator kind " + a.kind);
  GeneratorParams p = a.params;
  p.intersecting = !a.disjoint;
  InstanceFile file;
  try {
    file = generate(*kind, p, a.seed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  file.metadata.name = a.name;
  write_output(a.out, emit_instance(file));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nash social welfare toolkit for XOS valuations"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "run the solver and emit a report");
  solve_cmd->add_option("--instance", solve_args.instance, "instance file")->required();
  solve_cmd->add_option("--seed", solve_args.seed, "RNG seed for the random split");
  solve_cmd->add_flag("--topup", solve_args.topup, "hand leftover goods to agents");
  solve_cmd->add_option("--out", solve_args.out, "report path (default stdout)");

  ExactArgs exact_args;
  auto* exact_cmd = app.add_subcommand("exact", "exact optimum by exhaustive search");
  exact_cmd->add_option("--instance", exact_args.instance, "instance file")->required();
  exact_cmd->add_flag("--capped", exact_args.capped, "maximize capped social welfare instead of NSW");
  exact_cmd->add_option("--betas", exact_args.betas, "per-agent scaling factors")->delimiter(',');
  exact_cmd->add_option("--budget", exact_args.budget, "work budget");

  VerifyArgs verify_args;
  auto* verify_cmd = app.add_subcommand("verify", "run a property suite");
  verify_cmd->add_option("--suite", verify_args.suite, "suite name")
      ->required()
      ->check(CLI::IsMember({"matchhigh", "movingknife", "cappedwelfare", "rematch", "concentration"}));
  verify_cmd->add_option("--n", verify_args.n, "agent count");
  verify_cmd->add_option("--trials", verify_args.trials, "number of trials");
  verify_cmd->add_option("--seed", verify_args.seed, "RNG seed");

  GadgetArgs gadget_args;
  auto* gadget_cmd = app.add_subcommand("gadget", "build and verify an equicovering");
  gadget_cmd->add_option("--n", gadget_args.n, "parts per equipartition");
  gadget_cmd->add_option("--m", gadget_args.m, "good count");
  gadget_cmd->add_option("--r", gadget_args.r, "number of equipartitions");
  gadget_cmd->add_option("--eps", gadget_args.eps, "slack");
  gadget_cmd->add_option("--seed", gadget_args.seed, "first construction seed");
  gadget_cmd->add_option("--verify", gadget_args.verify, "exhaustive or sampled=K");
  gadget_cmd->add_flag("--gap", gadget_args.gap, "print the gap report as CSV");
  gadget_cmd->add_option("--trials", gadget_args.trials, "sampled inputs per case in the gap report");
  gadget_cmd->add_option("--retries", gadget_args.retries, "extra seeds to try");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "solve every instance in a directory");
  bench_cmd->add_option("--dir", bench_args.dir, "directory of instance files")->required();
  bench_cmd->add_option("--seeds", bench_args.seeds, "seeds 0..K-1 per instance");
  bench_cmd->add_option("--threads", bench_args.threads, "worker threads (default NSWXOS_THREADS or all cores)");
  bench_cmd->add_option("--budget", bench_args.budget, "exact search budget");

  GenerateArgs gen_args;
  auto* gen_cmd = app.add_subcommand("generate", "write a random instance");
  gen_cmd->add_option("--kind", gen_args.kind, "uniform-additive | k-xos-random | p1p2-witness | equicover-gadget")
      ->required();
  gen_cmd->add_option("--n", gen_args.params.n, "agents");
  gen_cmd->add_option("--m", gen_args.params.m, "goods");
  gen_cmd->add_option("--k", gen_args.params.k, "family size");
  gen_cmd->add_option("--r", gen_args.params.r, "equipartitions");
  gen_cmd->add_option("--density", gen_args.params.density, "nonzero weight probability");
  gen_cmd->add_flag("--disjoint", gen_args.disjoint, "gadget from a totally disjoint input");
  gen_cmd->add_option("--seed", gen_args.seed, "RNG seed");
  gen_cmd->add_option("--name", gen_args.name, "metadata name");
  gen_cmd->add_option("--out", gen_args.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*solve_cmd) return run_solve(solve_args);
    if (*exact_cmd) return run_exact(exact_args);
    if (*verify_cmd) return run_verify(verify_args);
    if (*gadget_cmd) return run_gadget(gadget_args);
    if (*bench_cmd) return run_bench(bench_args);
    if (*gen_cmd) return run_generate(gen_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
