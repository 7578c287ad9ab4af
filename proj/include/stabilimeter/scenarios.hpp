// Copyright 2026 The Stabilimeter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stabilimeter/core.hpp"
#include "stabilimeter/distribution.hpp"
#include "stabilimeter/formula.hpp"
#include "stabilimeter/random.hpp"

namespace stabilimeter {

/// Column layout of the correlated scenario. The noisy copy sits before the
/// target so that exact gain-ratio ties (samples where the two columns are
/// identical) go to the copy under the lowest-index rule, while any sample
/// containing a disagreement lets the target win outright.
inline constexpr std::size_t kProxyAttribute = 0;
inline constexpr std::size_t kTargetAttribute = 1;

struct CorrelatedScenario {
  std::size_t attributes = 6;
  /// Probability that the proxy disagrees with the target.
  double noise_rate = 0.02;

  void validate() const {
    if (attributes < 2) throw ParameterError("correlated scenario needs at least two attributes");
    if (!(noise_rate >= 0.0 && noise_rate < 0.5))
      throw ParameterError("noise_rate must lie in [0, 0.5)");
  }

  /// Boolean attributes "proxy", "target", "noise1", ...
  AttributeSchema schema() const {
    validate();
    std::vector<Attribute> list{{"proxy", {"0", "1"}}, {"target", {"0", "1"}}};
    for (std::size_t i = 2; i < attributes; ++i)
      list.push_back({"noise" + std::to_string(i - 1), {"0", "1"}});
    return AttributeSchema(std::move(list));
  }

  /// Marginal over vectors: target uniform, proxy = target flipped with
  /// probability noise_rate, other attributes uniform and independent.
  AttributeDistribution marginal() const {
    const double noise = noise_rate;
    return AttributeDistribution::custom(schema(), [noise](Rng& rng, std::span<Level> out) {
      out[kTargetAttribute] = static_cast<Level>(rng.below(2));
      out[kProxyAttribute] = rng.bernoulli(noise) ? 1 - out[kTargetAttribute]
                                                  : out[kTargetAttribute];
      for (std::size_t i = 2; i < out.size(); ++i) out[i] = static_cast<Level>(rng.below(2));
    });
  }

  /// class = target attribute.
  Concept target_concept() const {
    return formula_concept(BooleanFormula::variable(kTargetAttribute),
                           make_domain(schema(), ClassSet::binary()));
  }

  LabeledDistribution distribution() const {
    return LabeledDistribution(ConceptWithNoise{target_concept(), marginal(), 0.0});
  }
};

/// Labeled distribution over `s` boolean attributes whose first two columns
/// are nearly redundant copies, labeled by the target column.
inline LabeledDistribution make_correlated_scenario(std::size_t s, double noise_rate) {
  return CorrelatedScenario{s, noise_rate}.distribution();
}

struct DriftSequence {
  LabeledDistribution pre_drift;
  LabeledDistribution post_drift;
  std::size_t drift_at = 1;
  std::size_t batch_count = 2;
  std::size_t batch_size = 100;

  void validate() const {
    if (!same_domain(pre_drift.domain(), post_drift.domain()))
      throw InputError("pre- and post-drift distributions must share a domain");
    if (!(drift_at >= 1 && drift_at < batch_count))
      throw ParameterError("drift_at must satisfy 1 <= drift_at < batch_count");
    if (batch_size < 1) throw ParameterError("batch_size must be at least 1");
  }
};

/// Batch k is drawn with derive_seed(seed, "batch", k), from pre_drift
/// before drift_at and from post_drift from drift_at on.
inline std::vector<Dataset> make_drift_sequence(const DriftSequence& sequence, std::uint64_t seed) {
  sequence.validate();
  std::vector<Dataset> batches;
  batches.reserve(sequence.batch_count);
  for (std::size_t k = 0; k < sequence.batch_count; ++k) {
    const auto& source = k < sequence.drift_at ? sequence.pre_drift : sequence.post_drift;
    batches.push_back(sample_dataset(source, sequence.batch_size, derive_seed(seed, "batch", k)));
  }
  return batches;
}

/// Random operator tree of depth at most `max_depth` over `s` variables.
/// Each node picks uniformly among {leaf, not, and, or}, and must be a leaf
/// at the depth limit; a leaf picks uniformly among the s variables and the
/// two constants.
inline BooleanFormula make_random_formula(std::size_t s, std::size_t max_depth, std::uint64_t seed) {
  if (s < 1) throw ParameterError("formula needs at least one variable");
  if (max_depth < 1) throw ParameterError("max_depth must be at least 1");
  Rng rng(seed);
  auto build = [&](auto& self, std::size_t depth) -> BooleanFormula {
    const std::uint64_t shape = depth >= max_depth ? 0 : rng.below(4);
    switch (shape) {
      case 1: return BooleanFormula::negation(self(self, depth + 1));
      case 2: {
        auto left = self(self, depth + 1);
        return BooleanFormula::conjunction({std::move(left), self(self, depth + 1)});
      }
      case 3: {
        auto left = self(self, depth + 1);
        return BooleanFormula::disjunction({std::move(left), self(self, depth + 1)});
      }
      default: {
        const std::uint64_t pick = rng.below(s + 2);
        if (pick < s) return BooleanFormula::variable(static_cast<std::size_t>(pick));
        return BooleanFormula::constant(pick == s);
      }
    }
  };
  return build(build, 1);
}

}  // namespace stabilimeter
