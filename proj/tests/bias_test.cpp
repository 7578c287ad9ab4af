// Copyright 2026 The Stabilimeter Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "stabilimeter/bias.hpp"
#include "stabilimeter/formula.hpp"

using namespace stabilimeter;

namespace {

Concept parse(const char* text, std::size_t s) { return formula_concept(BooleanFormula::parse(text), s); }

AttributeDistribution uniform(std::size_t s) {
  return AttributeDistribution::uniform(AttributeSchema::boolean(s));
}

double binomial_coefficient(int n, int k) {
  double c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// Two concepts over 3 attributes that disagree exactly when x1 = 1.
struct Pair {
  Concept f1 = parse("(var 0)", 3);
  Concept f2 = parse("(and (var 0) (not (var 1)))", 3);
};

}  // namespace

TEST(Delta, Indicator) {
  EXPECT_EQ(delta(ClassLabel{0}, ClassLabel{0}), 1);
  EXPECT_EQ(delta(ClassLabel{0}, ClassLabel{1}), 0);
  EXPECT_EQ(delta(ClassLabel{3}, ClassLabel{3}), 1);
}

TEST(SignTest, ExactValues) {
  EXPECT_DOUBLE_EQ(sign_test_p_value(0, 0), 1.0);
  EXPECT_NEAR(sign_test_p_value(0, 10), 2.0 / 1024, 1e-12);
  EXPECT_NEAR(sign_test_p_value(10, 10), 2.0 / 1024, 1e-12);
  EXPECT_NEAR(sign_test_p_value(3, 10), 2.0 * (1 + 10 + 45 + 120) / 1024, 1e-12);
  EXPECT_DOUBLE_EQ(sign_test_p_value(5, 10), 1.0);
  double tail = 0;
  for (int i = 0; i <= 8; ++i) tail += binomial_coefficient(30, i);
  EXPECT_NEAR(sign_test_p_value(22, 30), 2 * tail / std::pow(2.0, 30), 1e-12);
}

TEST(Mixture, EndpointsFollowOneConcept) {
  const Pair c;
  const auto at0 = sample_mixture({uniform(3), 0.0, c.f1, c.f2}, 500, 1);
  const auto at1 = sample_mixture({uniform(3), 1.0, c.f1, c.f2}, 500, 1);
  EXPECT_EQ(evaluate_accuracy(c.f1, at0), (Fraction{500, 500}));
  EXPECT_EQ(evaluate_accuracy(c.f2, at1), (Fraction{500, 500}));
  // Swapped orientation exchanges the roles.
  const auto swapped0 =
      sample_mixture({uniform(3), 0.0, c.f1, c.f2, MixtureOrientation::swapped}, 500, 1);
  EXPECT_EQ(evaluate_accuracy(c.f2, swapped0), (Fraction{500, 500}));
}

TEST(Mixture, LabelSourceFrequency) {
  // Where the concepts disagree, the label reveals its source: f2 is chosen
  // with probability p. 4 sd of the binomial is allowed.
  const Pair c;
  for (double p : {0.2, 0.5, 0.7}) {
    const auto data = sample_mixture({uniform(3), p, c.f1, c.f2}, 20'000, 3);
    std::size_t disagree = 0, from_f2 = 0;
    for (const auto& e : data) {
      if (c.f1(e.vector) == c.f2(e.vector)) {
        EXPECT_EQ(e.label, c.f1(e.vector));
        continue;
      }
      ++disagree;
      from_f2 += e.label == c.f2(e.vector);
    }
    const double rate = static_cast<double>(from_f2) / disagree;
    EXPECT_NEAR(rate, p, 4 * std::sqrt(p * (1 - p) / disagree)) << p;
  }
}

TEST(Mixture, MarginalDoesNotDependOnP) {
  // The attribute vectors come from the base distribution whatever p is.
  const Pair c;
  const auto base = AttributeDistribution::table(
      AttributeSchema::boolean(3), {{{0, 0, 0}, 5}, {{1, 0, 1}, 3}, {{1, 1, 0}, 2}});
  for (double p : {0.0, 0.5, 1.0}) {
    const auto data = sample_mixture({base, p, c.f1, c.f2}, 8000, 5);
    std::size_t first = 0;
    for (const auto& e : data) first += e.vector == AttributeVector{0, 0, 0};
    EXPECT_NEAR(first / 8000.0, 0.5, 4 * std::sqrt(0.25 / 8000));
  }
  // Identical seeds give identical vectors for every p.
  const auto a = sample_mixture({base, 0.1, c.f1, c.f2}, 300, 9);
  const auto b = sample_mixture({base, 0.9, c.f1, c.f2}, 300, 9);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].vector, b[i].vector);
}

TEST(Mixture, Validation) {
  const Pair c;
  EXPECT_THROW(sample_mixture({uniform(3), 1.5, c.f1, c.f2}, 10, 0), ParameterError);
  EXPECT_THROW(sample_mixture({uniform(3), 0.5, c.f1, parse("(var 0)", 4)}, 10, 0), InputError);
  EXPECT_THROW(sample_mixture({uniform(4), 0.5, c.f1, c.f2}, 10, 0), InputError);
}

TEST(Preference, IdenticalConceptsTie) {
  const auto f = parse("(or (var 0) (var 2))", 3);
  const auto r = measure_preference(TreeLearner{}, {uniform(3), 0.5, f, f}, uniform(3),
                                    {.train_size = 30, .trials = 10, .n_agree = 500}, 4);
  EXPECT_EQ(r.mean_agree_f1, r.mean_agree_f2);
  EXPECT_FALSE(r.prefers_f1);
  EXPECT_FALSE(r.decided);
}

TEST(Preference, MeansMatchPerTrialRecords) {
  const Pair c;
  const auto r = measure_preference(TreeLearner{}, {uniform(3), 0.5, c.f1, c.f2}, uniform(3),
                                    {.train_size = 40, .trials = 12, .n_agree = 800}, 8);
  ASSERT_EQ(r.per_trial.size(), 12u);
  double a = 0, b = 0;
  for (const auto& t : r.per_trial) {
    a += t.f1;
    b += t.f2;
  }
  EXPECT_NEAR(r.mean_agree_f1, a / 12, 1e-12);
  EXPECT_NEAR(r.mean_agree_f2, b / 12, 1e-12);
  EXPECT_EQ(r.prefers_f1, r.mean_agree_f1 > r.mean_agree_f2);
}

TEST(Preference, FixedLearnersAlwaysPreferTheirConcept) {
  const Pair c;
  for (double p : {0.0, 0.5, 1.0}) {
    const auto one = measure_preference(FixedConceptLearner{c.f1}, {uniform(3), p, c.f1, c.f2},
                                        uniform(3), {.train_size = 10, .trials = 8, .n_agree = 400}, 1);
    EXPECT_EQ(one.mean_agree_f1, 1.0);
    EXPECT_TRUE(one.prefers_f1 && one.decided);
    const auto two = measure_preference(FixedConceptLearner{c.f2}, {uniform(3), p, c.f1, c.f2},
                                        uniform(3), {.train_size = 10, .trials = 8, .n_agree = 400}, 1);
    EXPECT_EQ(two.mean_agree_f2, 1.0);
    EXPECT_TRUE(!two.prefers_f1 && two.decided);
  }
}

TEST(Preference, ChooserFollowsTheMajoritySource) {
  const Pair c;
  const AccuracyChooser chooser({c.f1, c.f2});
  const PreferenceOptions options{.train_size = 100, .trials = 20, .n_agree = 1000};
  EXPECT_TRUE(measure_preference(chooser, {uniform(3), 0.1, c.f1, c.f2}, uniform(3), options, 2)
                  .prefers_f1);
  EXPECT_FALSE(measure_preference(chooser, {uniform(3), 0.9, c.f1, c.f2}, uniform(3), options, 2)
                   .prefers_f1);
}

TEST(Preference, Deterministic) {
  const Pair c;
  const PreferenceOptions serial{.train_size = 30, .trials = 6, .n_agree = 500, .execution = {1}};
  auto threaded = serial;
  threaded.execution = ExecutionPolicy{4};
  const auto a = measure_preference(TreeLearner{}, {uniform(3), 0.3, c.f1, c.f2}, uniform(3), serial, 3);
  const auto b = measure_preference(TreeLearner{}, {uniform(3), 0.3, c.f1, c.f2}, uniform(3), threaded, 3);
  for (std::size_t k = 0; k < a.per_trial.size(); ++k) {
    EXPECT_EQ(a.per_trial[k].f1, b.per_trial[k].f1);
    EXPECT_EQ(a.per_trial[k].f2, b.per_trial[k].f2);
  }
}

TEST(PGrid, Shape) {
  const auto grid = p_grid(0.05);
  ASSERT_EQ(grid.size(), 21u);
  EXPECT_EQ(grid.front(), 0.0);
  EXPECT_EQ(grid[10], 0.5);
  EXPECT_EQ(grid.back(), 1.0);
  EXPECT_EQ(grid[3], 0.15);
  const auto odd = p_grid(0.07);
  EXPECT_NE(std::find(odd.begin(), odd.end(), 0.5), odd.end());
  EXPECT_EQ(odd.back(), 1.0);
  EXPECT_TRUE(std::is_sorted(odd.begin(), odd.end()));
  EXPECT_THROW(p_grid(0.0), ParameterError);
  EXPECT_THROW(p_grid(0.2), ParameterError);
}

TEST(BiasStrength, AlwaysF1HasFullStrength) {
  const Pair c;
  const BiasSweepOptions options{.grid_step = 0.1,
                                 .preference = {.train_size = 10, .trials = 6, .n_agree = 300}};
  const auto r = measure_bias_strength(FixedConceptLearner{c.f1}, c.f1, c.f2, uniform(3), uniform(3),
                                       options, 1);
  EXPECT_FALSE(r.indeterminate);
  EXPECT_TRUE(r.biased_toward_f1_at_half);
  ASSERT_TRUE(r.flip_threshold && r.strength);
  EXPECT_EQ(*r.strength, 1.0);
}

TEST(BiasStrength, AlwaysF2HasNoThreshold) {
  const Pair c;
  const BiasSweepOptions options{.grid_step = 0.1,
                                 .preference = {.train_size = 10, .trials = 6, .n_agree = 300}};
  const auto r = measure_bias_strength(FixedConceptLearner{c.f2}, c.f1, c.f2, uniform(3), uniform(3),
                                       options, 1);
  EXPECT_FALSE(r.biased_toward_f1_at_half);
  EXPECT_FALSE(r.flip_threshold.has_value());
  EXPECT_FALSE(r.strength.has_value());
}

TEST(BiasStrength, StrengthOnlyAboveHalf) {
  const Pair c;
  const AccuracyChooser chooser({c.f1, c.f2});
  const BiasSweepOptions options{.grid_step = 0.1,
                                 .preference = {.train_size = 100, .trials = 10, .n_agree = 1000}};
  const auto r = measure_bias_strength(chooser, c.f1, c.f2, uniform(3), uniform(3), options, 6);
  EXPECT_FALSE(r.indeterminate);
  ASSERT_TRUE(r.flip_threshold.has_value());
  EXPECT_NEAR(*r.flip_threshold, 0.5, 0.1 + 1e-9);
  if (r.strength) {
    EXPECT_GT(*r.strength, 0.5);
    EXPECT_LE(*r.strength, 1.0);
  }
}

TEST(BiasStrength, SwappedOrientationMirrorsThreshold) {
  const Pair c;
  const BiasSweepOptions options{.grid_step = 0.1,
                                 .preference = {.train_size = 10, .trials = 6, .n_agree = 300},
                                 .orientation = MixtureOrientation::swapped};
  const auto r = measure_bias_strength(FixedConceptLearner{c.f1}, c.f1, c.f2, uniform(3), uniform(3),
                                       options, 1);
  ASSERT_TRUE(r.flip_threshold);
  EXPECT_EQ(*r.flip_threshold, 0.0);
  EXPECT_EQ(r.orientation, MixtureOrientation::swapped);
}
