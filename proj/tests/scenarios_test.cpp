// Copyright 2026 The Stabilimeter Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "stabilimeter/scenarios.hpp"
#include "stabilimeter/stability.hpp"

using namespace stabilimeter;

TEST(CorrelatedScenario, Schema) {
  const auto schema = CorrelatedScenario{}.schema();
  ASSERT_EQ(schema.size(), 6u);
  EXPECT_EQ(schema[kProxyAttribute].name, "proxy");
  EXPECT_EQ(schema[kTargetAttribute].name, "target");
  EXPECT_EQ(schema[5].name, "noise4");
  EXPECT_THROW(make_correlated_scenario(1, 0.02), ParameterError);
  EXPECT_THROW(make_correlated_scenario(6, 0.5), ParameterError);
  EXPECT_THROW(make_correlated_scenario(6, -0.1), ParameterError);
}

TEST(CorrelatedScenario, ZeroNoiseColumnsAreEqual) {
  const auto data = sample_dataset(make_correlated_scenario(4, 0.0), 500, 1);
  for (const auto& e : data) EXPECT_EQ(e.vector[kProxyAttribute], e.vector[kTargetAttribute]);
}

TEST(CorrelatedScenario, DisagreementRate) {
  // Binomial oracle: sd of the rate at 10,000 draws is sqrt(0.02 * 0.98 / 1e4) = 0.0014.
  const auto data = sample_dataset(make_correlated_scenario(6, 0.02), 10'000, 2);
  std::size_t differ = 0;
  for (const auto& e : data) differ += e.vector[kProxyAttribute] != e.vector[kTargetAttribute];
  EXPECT_NEAR(differ / 10'000.0, 0.02, 0.006);
}

TEST(CorrelatedScenario, LabelIsTarget) {
  const auto data = sample_dataset(make_correlated_scenario(6, 0.1), 2000, 3);
  for (const auto& e : data) EXPECT_EQ(e.label.index, e.vector[kTargetAttribute]);
}

TEST(CorrelatedScenario, Correlation) {
  // For equiprobable binary columns with flip rate q, the correlation is 1 - 2q.
  const double q = 0.2;
  const std::size_t n = 20'000;
  const auto data = sample_dataset(make_correlated_scenario(3, q), n, 4);
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (const auto& e : data) {
    const double x = e.vector[kProxyAttribute], y = e.vector[kTargetAttribute];
    sx += x, sy += y, sxy += x * y, sxx += x * x, syy += y * y;
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double r = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
  EXPECT_NEAR(r, 1 - 2 * q, 0.02);
}

TEST(CorrelatedScenario, OtherAttributesUniform) {
  const auto data = sample_dataset(make_correlated_scenario(6, 0.02), 10'000, 5);
  for (std::size_t a = 2; a < 6; ++a) {
    std::size_t ones = 0;
    for (const auto& e : data) ones += e.vector[a];
    EXPECT_NEAR(ones / 10'000.0, 0.5, 0.02);
  }
}

namespace {

std::size_t disagreements(const Dataset& data) {
  std::size_t k = 0;
  for (const auto& e : data) k += e.vector[kProxyAttribute] != e.vector[kTargetAttribute];
  return k;
}

// First size-30 sample, scanning seeds upward, with exactly `flips` rows where
// the proxy and target columns differ.
Dataset sample_with(std::size_t flips) {
  const CorrelatedScenario scenario;
  for (std::uint64_t seed = 0;; ++seed) {
    auto data = sample_dataset(scenario.distribution(), 30, seed);
    if (disagreements(data) == flips) return data;
  }
}

}  // namespace

TEST(CorrelatedScenario, NoDisagreementMeansIdenticalTrees) {
  // Every half ties, and the tie goes to the proxy column each time.
  const auto data = sample_with(0);
  const auto uniform = AttributeDistribution::uniform(data.schema());
  const auto report =
      estimate_stability_accuracy(TreeLearner{}, data, uniform, 7, {.m = 20, .n = 2000});
  EXPECT_EQ(report.stability_estimate, 1.0);
}

TEST(CorrelatedScenario, OneDisagreementSplitsTheTrees) {
  // Exactly one half holds the disagreeing row: that half splits on the
  // target, the other on the proxy. The two trees differ wherever the columns
  // do: half the space under uniform vectors, 2% under the scenario marginal.
  const CorrelatedScenario scenario;
  const auto data = sample_with(1);
  const auto uniform = AttributeDistribution::uniform(data.schema());
  const StabilityOptions options{.m = 20, .n = 4000};
  const auto wide = estimate_stability_accuracy(TreeLearner{}, data, uniform, 7, options);
  const auto narrow = estimate_stability_accuracy(TreeLearner{}, data, scenario.marginal(), 7, options);
  for (std::size_t i = 0; i < options.m; ++i) {
    EXPECT_NEAR(wide.iterations[i].stab.value(), 0.5, 4 * 0.5 / std::sqrt(4000.0));
    EXPECT_NEAR(narrow.iterations[i].stab.value(), 0.98, 4 * std::sqrt(0.98 * 0.02 / 4000));
  }
  EXPECT_GT(wide.accuracy_estimate, 0.9);
}

TEST(DriftSequence, BatchesComeFromTheRightSide) {
  const auto f = formula_concept(BooleanFormula::parse("(or (var 0) (var 1))"), 3);
  const auto uniform = AttributeDistribution::uniform(AttributeSchema::boolean(3));
  const DriftSequence sequence{ConceptWithNoise{f, uniform, 0.0},
                               ConceptWithNoise{complement(f), uniform, 0.0}, 5, 10, 50};
  const auto batches = make_drift_sequence(sequence, 9);
  ASSERT_EQ(batches.size(), 10u);
  for (std::size_t k = 0; k < batches.size(); ++k) {
    EXPECT_EQ(batches[k].size(), 50u);
    const auto hits = evaluate_accuracy(k < 5 ? f : complement(f), batches[k]);
    EXPECT_TRUE(hits.is_one()) << k;
  }
  EXPECT_EQ(batches[3], make_drift_sequence(sequence, 9)[3]);
}

TEST(DriftSequence, Validation) {
  const auto f = formula_concept(BooleanFormula::parse("(var 0)"), 2);
  const auto uniform = AttributeDistribution::uniform(AttributeSchema::boolean(2));
  const ConceptWithNoise side{f, uniform, 0.0};
  EXPECT_THROW(make_drift_sequence({side, side, 0, 4, 10}, 0), ParameterError);
  EXPECT_THROW(make_drift_sequence({side, side, 4, 4, 10}, 0), ParameterError);
  EXPECT_THROW(make_drift_sequence({side, side, 1, 4, 0}, 0), ParameterError);
  const auto g = formula_concept(BooleanFormula::parse("(var 0)"), 3);
  const ConceptWithNoise other{g, AttributeDistribution::uniform(AttributeSchema::boolean(3)), 0.0};
  EXPECT_THROW(make_drift_sequence({side, other, 1, 4, 10}, 0), InputError);
}

TEST(RandomFormula, DeterministicAndBounded) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto f = make_random_formula(5, 4, seed);
    EXPECT_EQ(f, make_random_formula(5, 4, seed));
    EXPECT_LE(f.variable_count(), 5u);
  }
  EXPECT_THROW(make_random_formula(0, 3, 0), ParameterError);
  EXPECT_THROW(make_random_formula(3, 0, 0), ParameterError);
}

TEST(RandomFormula, DepthOneIsALeaf) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto f = make_random_formula(4, 1, seed);
    EXPECT_TRUE(f.op() == BooleanFormula::Op::variable || f.op() == BooleanFormula::Op::constant);
  }
}

TEST(RandomFormula, UsesEveryShape) {
  bool seen[5] = {};
  for (std::uint64_t seed = 0; seed < 200; ++seed)
    seen[static_cast<int>(make_random_formula(3, 3, seed).op())] = true;
  for (bool s : seen) EXPECT_TRUE(s);
}
