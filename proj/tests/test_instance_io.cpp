#include <gtest/gtest.h>

#include "nswxos/generators.hpp"
#include "nswxos/io.hpp"
#include "nswxos/nsw_solver.hpp"

using namespace nswxos;

namespace {

std::string small_text() {
  return R"({"format": "nswxos-instance", "version": 1, "n": 2, "m": 4,
            "agents": [[[1, 0.5, 0, 2]], [[0, 1, 1, 1], [3, 0, 0, 0.25]]]})";
}

void expect_parse_error(const std::string& text, const std::string& where) {
  try {
    parse_instance(text);
    FAIL() << "accepted: " << text;
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(where), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(InstanceIo, RoundTripSmall) {
  const auto file = parse_instance(small_text());
  EXPECT_EQ(file.instance.n(), 2u);
  EXPECT_EQ(file.instance.m(), 4u);
  EXPECT_EQ(file.instance.valuation(1).family().size(), 2u);
  const std::string once = emit_instance(file);
  EXPECT_EQ(emit_instance(parse_instance(once)), once);
}

TEST(InstanceIo, CanonicalShape) {
  const std::string text = emit_instance(parse_instance(small_text()));
  EXPECT_EQ(text.find("\"agents\""), 4u);
  EXPECT_NE(text.find("[1, 0.5, 0, 2]"), std::string::npos);
  EXPECT_EQ(text.back(), '\n');
}

TEST(InstanceIo, Rejections) {
  expect_parse_error(R"({"format": "nswxos-instance", "version": 1, "n": 1, "m": 2, "agents": [[[1, -1]]]})",
                     "agents[0][0][1]");
  expect_parse_error(R"({"format": "nswxos-instance", "version": 1, "n": 1, "m": 2, "agents": [[[1, 2, 3]]]})",
                     "agents[0][0]");
  expect_parse_error(R"({"format": "nswxos-instance", "version": 1, "n": 2, "m": 1, "agents": [[[1]]]})", "agents");
  expect_parse_error(R"({"format": "nswxos-instance", "version": 1, "n": 1, "m": 1, "agents": [[]]})", "agents[0]");
  expect_parse_error(R"({"format": "nswxos-instance", "version": 1, "n": 1, "m": 1, "agents": [[["x"]]]})",
                     "agents[0][0][0]");
  expect_parse_error(R"({"format": "other", "version": 1, "n": 1, "m": 1, "agents": [[[1]]]})", "format");
  expect_parse_error(R"({"format": "nswxos-instance", "version": 9, "n": 1, "m": 1, "agents": [[[1]]]})", "version");
  expect_parse_error(R"({"format": "nswxos-instance", "version": 1, "n": 1, "m": 1, "agents": [[[1]]], "x": 1})",
                     "x");
  expect_parse_error(R"({"format": "nswxos-instance", "version": 1, "n": 1, "m": 1)", "syntax");
  expect_parse_error("[1, 2]", "instance");
}

TEST(InstanceIo, MetadataRoundTrip) {
  InstanceFile file{Instance(1, {XosValuation::additive({2})}), {}};
  file.metadata.name = "tiny";
  file.metadata.generator = "hand";
  file.metadata.seed = 18446744073709551615ULL;
  const auto back = parse_instance(emit_instance(file));
  EXPECT_EQ(back.metadata.name, file.metadata.name);
  EXPECT_EQ(back.metadata.seed, file.metadata.seed);
  EXPECT_EQ(instance_digest(back.instance), instance_digest(file.instance));
}

TEST(InstanceIo, DigestIgnoresMetadataButNotWeights) {
  InstanceFile a{Instance(2, {XosValuation::additive({1, 2})}), {}};
  InstanceFile b = a;
  b.metadata.name = "renamed";
  EXPECT_EQ(instance_digest(a.instance), instance_digest(b.instance));
  const Instance c(2, {XosValuation::additive({1, 2.0000000000000004})});
  EXPECT_NE(instance_digest(a.instance), instance_digest(c));
  EXPECT_EQ(instance_digest(a.instance).size(), 64u);
}

TEST(InstanceIo, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(InstanceIo, RandomRoundTrips) {
  SplitMix64 rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    GeneratorParams p;
    p.n = 1 + rng.below(5);
    p.m = rng.below(12);
    p.k = 1 + rng.below(4);
    p.density = rng.uniform01();
    const auto file = generate(GeneratorKind::kKXosRandom, p, rng.next());
    const std::string text = emit_instance(file);
    const auto back = parse_instance(text);
    ASSERT_EQ(emit_instance(back), text);
    for (Agent i = 0; i < p.n; ++i) {
      const auto& fa = file.instance.valuation(i).family();
      const auto& fb = back.instance.valuation(i).family();
      ASSERT_EQ(fa.size(), fb.size());
      for (std::size_t k = 0; k < fa.size(); ++k) ASSERT_EQ(fa[k].weights(), fb[k].weights());
    }
  }
}

TEST(Generators, WitnessShape) {
  const auto w = p1p2_witness(4);
  EXPECT_EQ(w.instance.m(), 16u);
  for (Agent i = 0; i < 4; ++i) {
    EXPECT_EQ(w.reference[i].size(), 4u);
    for (Good g : w.reference[i]) EXPECT_DOUBLE_EQ(w.instance.value(i, g), 0.125);
  }
  const auto file = generate(GeneratorKind::kP1P2Witness, GeneratorParams{}, 0);
  EXPECT_EQ(file.metadata.generator, "p1p2-witness");
}

TEST(Generators, DeterministicAndShaped) {
  GeneratorParams p;
  p.n = 2;
  p.m = 4;
  EXPECT_EQ(emit_instance(generate(GeneratorKind::kUniformAdditive, p, 3)),
            emit_instance(generate(GeneratorKind::kUniformAdditive, p, 3)));
  EXPECT_NE(emit_instance(generate(GeneratorKind::kUniformAdditive, p, 3)),
            emit_instance(generate(GeneratorKind::kUniformAdditive, p, 4)));
  p.k = 5;
  const auto x = generate(GeneratorKind::kKXosRandom, p, 1);
  for (Agent i = 0; i < 2; ++i) EXPECT_EQ(x.instance.valuation(i).family().size(), 5u);
  p.m = 6;
  p.r = 3;
  const auto g = generate(GeneratorKind::kEquicoverGadget, p, 1);
  EXPECT_EQ(g.instance.m(), 6u);
  EXPECT_EQ(generator_from_name("k-xos-random"), GeneratorKind::kKXosRandom);
  EXPECT_FALSE(generator_from_name("nope"));
  p.m = 5;
  EXPECT_THROW(generate(GeneratorKind::kEquicoverGadget, p, 1), std::invalid_argument);
}

TEST(Report, SelfConsistentAndDeterministic) {
  GeneratorParams p;
  p.n = 3;
  p.m = 20;
  const auto file = generate(GeneratorKind::kKXosRandom, p, 21);
  const auto a = emit_report(file.instance, solve(file.instance, 5), false);
  const auto b = emit_report(file.instance, solve(file.instance, 5), false);
  EXPECT_EQ(a, b);
  const Json j = Json::parse(a);
  EXPECT_TRUE(report_consistent(file.instance, j));
  Json tampered = j;
  tampered["nsw"] = j["nsw"].get<double>() * 1.01 + 1.0;
  EXPECT_FALSE(report_consistent(file.instance, tampered));
  EXPECT_EQ(j["instance_digest"], instance_digest(file.instance));
}
