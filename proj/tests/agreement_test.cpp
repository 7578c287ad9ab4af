// Copyright 2026 The Stabilimeter Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "stabilimeter/agreement.hpp"
#include "stabilimeter/formula.hpp"
#include "stabilimeter/scenarios.hpp"

using namespace stabilimeter;

namespace {

Concept parse(const char* text, std::size_t s) { return formula_concept(BooleanFormula::parse(text), s); }

AttributeDistribution uniform(std::size_t s) {
  return AttributeDistribution::uniform(AttributeSchema::boolean(s));
}

}  // namespace

TEST(EstimateAgreement, SelfAgreementIsOne) {
  const auto f = parse("(or (and (var 0) (var 1)) (not (var 2)))", 3);
  for (std::uint64_t n : {1u, 7u, 5000u}) {
    const auto e = estimate_agreement(f, f, uniform(3), n, 99);
    EXPECT_EQ(e.agreeing, n);
    EXPECT_EQ(e.value(), 1.0);
  }
}

TEST(EstimateAgreement, WorstCaseStdAtTenThousand) {
  const auto f = parse("(var 0)", 1);
  EXPECT_EQ(estimate_agreement(f, f, uniform(1), 10'000, 0).worst_case_std, 0.005);
}

TEST(EstimateAgreement, ConjunctionVersusVariable) {
  // Exact value 3/4 by enumeration; 0.02 is about 4.6 sd at n = 10,000.
  int agree = 0;
  for (std::uint32_t r = 0; r < 4; ++r) agree += (oracle::bit(r, 0) && oracle::bit(r, 1)) == oracle::bit(r, 0);
  ASSERT_EQ(agree, 3);
  const auto e = estimate_agreement(parse("(and (var 0) (var 1))", 2), parse("(var 0)", 2), uniform(2),
                                    10'000, 2024);
  EXPECT_NEAR(e.value(), 0.75, 0.02);
}

TEST(EstimateAgreement, SymmetricUnderSwap) {
  const auto a = parse("(or (var 0) (var 3))", 4);
  const auto b = parse("(and (var 1) (not (var 3)))", 4);
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    EXPECT_EQ(estimate_agreement(a, b, uniform(4), 3000, seed).agreeing,
              estimate_agreement(b, a, uniform(4), 3000, seed).agreeing);
}

TEST(EstimateAgreement, ChunkedCountIndependentOfThreads) {
  const auto a = parse("(or (var 0) (var 3))", 5);
  const auto b = parse("(and (var 1) (not (var 4)))", 5);
  const auto serial = estimate_agreement(a, b, uniform(5), 50'001, 8, ExecutionPolicy{1});
  const auto threaded = estimate_agreement(a, b, uniform(5), 50'001, 8, ExecutionPolicy{4});
  EXPECT_EQ(serial.agreeing, threaded.agreeing);
}

TEST(EstimateAgreement, Errors) {
  const auto a = parse("(var 0)", 2);
  const auto b = parse("(var 0)", 3);
  EXPECT_THROW(estimate_agreement(a, b, uniform(2), 10, 0), InputError);
  EXPECT_THROW(estimate_agreement(a, a, uniform(3), 10, 0), InputError);
  EXPECT_THROW(estimate_agreement(a, a, uniform(2), 0, 0), ParameterError);
}

TEST(EstimateAgreement, StdAtHalfApproachesBound) {
  // x0 vs x1 agree with probability exactly 1/2: the worst case.
  const auto a = parse("(var 0)", 2);
  const auto b = parse("(var 1)", 2);
  const std::uint64_t n = 100;
  const int runs = 2000;
  double sum = 0, sq = 0;
  for (int seed = 0; seed < runs; ++seed) {
    const double v = estimate_agreement(a, b, uniform(2), n, seed).value();
    sum += v;
    sq += v * v;
  }
  const double mean = sum / runs;
  const double sd = std::sqrt((sq - runs * mean * mean) / (runs - 1));
  // Sample sd of 2000 draws has relative error ~1.6%; allow 10%.
  EXPECT_LE(sd, 0.05 * 1.1);
  EXPECT_GE(sd, 0.05 * 0.9);
}

TEST(EstimateAgreement, StdBelowBoundAwayFromHalf) {
  const auto a = parse("(and (var 0) (var 1))", 2);
  const auto b = parse("(var 0)", 2);
  const std::uint64_t n = 100;
  const int runs = 2000;
  double sum = 0, sq = 0;
  for (int seed = 0; seed < runs; ++seed) {
    const double v = estimate_agreement(a, b, uniform(2), n, seed).value();
    sum += v;
    sq += v * v;
  }
  const double mean = sum / runs;
  const double sd = std::sqrt((sq - runs * mean * mean) / (runs - 1));
  EXPECT_LE(sd, bernoulli_worst_case_std(n) * 1.05);
  EXPECT_NEAR(sd, std::sqrt(0.75 * 0.25 / n), 0.005);
}

TEST(EstimateAgreement, ConsistentWithExactValue) {
  // |estimate - exact| <= 4 sd in at least 99.9% of runs.
  const auto a = parse("(or (var 0) (and (var 1) (var 2)))", 3);
  const auto b = parse("(var 2)", 3);
  const double p = exact_agreement(a, b, uniform(3)).value();
  const std::uint64_t n = 400;
  const double tolerance = 4 * std::sqrt(p * (1 - p) / n);
  int misses = 0;
  const int runs = 2000;
  for (int seed = 0; seed < runs; ++seed)
    misses += std::abs(estimate_agreement(a, b, uniform(3), n, seed).value() - p) > tolerance;
  EXPECT_LE(misses, runs / 1000);
}

TEST(ExactAgreement, DeMorganPairIsOne) {
  EXPECT_EQ(exact_agreement(parse("(not (or (var 0) (var 1)))", 2),
                            parse("(and (not (var 0)) (not (var 1)))", 2), uniform(2)),
            (Fraction{1, 1}));
}

TEST(ExactAgreement, NegationIsZero) {
  const auto f = parse("(or (var 0) (var 2))", 3);
  EXPECT_TRUE(exact_agreement(f, complement(f), uniform(3)).is_zero());
  EXPECT_TRUE(exact_agreement(f, parse("(not (or (var 0) (var 2)))", 3), uniform(3)).is_zero());
}

TEST(ExactAgreement, ConjunctionVersusVariableIsThreeQuarters) {
  const auto e = exact_agreement(parse("(and (var 0) (var 1))", 2), parse("(var 0)", 2), uniform(2));
  EXPECT_EQ(e.numerator, 3u);
  EXPECT_EQ(e.denominator, 4u);
}

TEST(ExactAgreement, TableDistributionIsWeighted) {
  // Disagreement only at (1,0), which carries weight 2 of 10.
  auto schema = AttributeSchema::boolean(2);
  const auto table = AttributeDistribution::table(
      schema, {{{0, 0}, 3}, {{0, 1}, 3}, {{1, 0}, 2}, {{1, 1}, 2}});
  EXPECT_EQ(exact_agreement(parse("(and (var 0) (var 1))", 2), parse("(var 0)", 2), table),
            (Fraction{4, 5}));
}

TEST(ExactAgreement, CapacityBound) {
  const auto f = parse("(var 0)", 25);
  EXPECT_THROW(exact_agreement(f, f, uniform(25)), CapacityError);
  EXPECT_NO_THROW(exact_agreement(f, f, uniform(25), std::uint64_t{1} << 25));
  const auto custom = CorrelatedScenario{}.marginal();
  const auto g = CorrelatedScenario{}.target_concept();
  EXPECT_THROW(exact_agreement(g, g, custom), CapacityError);
}

TEST(MateriallyEquivalent, Examples) {
  EXPECT_TRUE(materially_equivalent(parse("(not (or (var 0) (var 1)))", 2),
                                    parse("(and (not (var 0)) (not (var 1)))", 2), uniform(2)));
  EXPECT_FALSE(materially_equivalent(parse("(var 0)", 2), parse("(var 1)", 2), uniform(2)));
  const auto f = parse("(or (var 1) (not (var 1)))", 2);
  EXPECT_TRUE(materially_equivalent(f, f, uniform(2)));
}

TEST(MateriallyEquivalent, NeedsStrictlyPositiveDistribution) {
  const auto partial = AttributeDistribution::table(AttributeSchema::boolean(2), {{{0, 0}, 1}});
  const auto f = parse("(var 0)", 2);
  EXPECT_THROW(materially_equivalent(f, f, partial), ParameterError);
}

TEST(MateriallyEquivalent, AgreesWithTruthTablesOnRandomPairs) {
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const std::size_t s = 1 + seed % 10;
    const auto a = make_random_formula(s, 4, derive_seed(seed, "a", 0));
    // Every fourth pair compares a formula with a double negation of itself.
    const auto b = seed % 4 == 0 ? BooleanFormula::negation(BooleanFormula::negation(a))
                                 : make_random_formula(s, 4, derive_seed(seed, "b", 0));
    const bool expected = oracle::same_truth_table(a, b, static_cast<int>(s));
    EXPECT_EQ(materially_equivalent(formula_concept(a, s), formula_concept(b, s), uniform(s)), expected)
        << a.to_string() << " vs " << b.to_string();
  }
}
