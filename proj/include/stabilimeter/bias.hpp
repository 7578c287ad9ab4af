// Copyright 2026 The Stabilimeter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "stabilimeter/agreement.hpp"
#include "stabilimeter/core.hpp"
#include "stabilimeter/distribution.hpp"
#include "stabilimeter/learners.hpp"
#include "stabilimeter/parallel.hpp"

namespace stabilimeter {

/// Class equality indicator: 1 when the labels match, 0 otherwise.
constexpr int delta(ClassLabel c1, ClassLabel c2) noexcept { return c1 == c2 ? 1 : 0; }

/// `size` iid draws from the mixture: a ~ D'_A, then the label is f2(a) with
/// probability p and f1(a) otherwise (roles swap under
/// MixtureOrientation::swapped).
inline Dataset sample_mixture(const MixtureParams& params, std::size_t size, std::uint64_t seed) {
  return sample_dataset(LabeledDistribution(params), size, seed);
}

/// Two-sided exact sign test: probability, under a fair coin, of a split at
/// least as lopsided as `positive` successes out of `trials`.
inline double sign_test_p_value(std::uint64_t positive, std::uint64_t trials) {
  if (trials == 0) return 1.0;
  const std::uint64_t k = std::min(positive, trials - positive);
  const double n = static_cast<double>(trials);
  double tail = 0.0;
  for (std::uint64_t i = 0; i <= k; ++i) {
    const double x = static_cast<double>(i);
    tail += std::exp(std::lgamma(n + 1) - std::lgamma(x + 1) - std::lgamma(n - x + 1) -
                     n * std::log(2.0));
  }
  return std::min(1.0, 2.0 * tail);
}

struct TrialAgreement {
  double f1 = 0.0;
  double f2 = 0.0;
};

struct PreferenceOptions {
  std::size_t train_size = 100;
  std::size_t trials = 30;
  /// Agreement samples per trial and concept.
  std::uint64_t n_agree = 10'000;
  /// Significance level of the sign test deciding a preference.
  double alpha = 0.05;
  ExecutionPolicy execution{};
};

struct PreferenceResult {
  double p = 0.0;
  double mean_agree_f1 = 0.0;
  double mean_agree_f2 = 0.0;
  std::size_t trials = 0;
  std::vector<TrialAgreement> per_trial;
  /// mean_agree_f1 > mean_agree_f2.
  bool prefers_f1 = false;
  /// The paired per-trial differences pass the sign test.
  bool decided = false;
  double sign_test_p = 1.0;
};

/// Estimates E[agree(f1, f_L)] and E[agree(f2, f_L)] over `trials` training
/// sets drawn from the mixture. Both agreements of a trial use the same
/// agreement sample.
inline PreferenceResult measure_preference(const Learner& learner, const MixtureParams& params,
                                           const AttributeDistribution& agree_dist,
                                           const PreferenceOptions& options, std::uint64_t seed) {
  params.validate();
  if (options.trials < 1) throw ParameterError("trials must be at least 1");
  if (options.train_size < 1) throw ParameterError("train_size must be at least 1");
  if (options.n_agree < 1) throw ParameterError("n_agree must be at least 1");

  const SeedSpec seeds{seed};
  PreferenceResult result;
  result.p = params.p;
  result.trials = options.trials;
  result.per_trial.resize(options.trials);

  parallel_for(options.trials, options.execution, [&](std::size_t k) {
    const Dataset t_p = sample_mixture(params, options.train_size, seeds.derive("mixture", k));
    Concept learned = [&] {
      try {
        return learner.train(t_p, seeds.derive("train", k));
      } catch (const Error&) {
        throw;
      } catch (const std::exception& e) {
        throw LearnerError(k, e.what());
      }
    }();
    const std::uint64_t agree_seed = seeds.derive("agreement", k);
    result.per_trial[k] = {
        estimate_agreement(params.f1, learned, agree_dist, options.n_agree, agree_seed).value(),
        estimate_agreement(params.f2, learned, agree_dist, options.n_agree, agree_seed).value()};
  });

  std::uint64_t positive = 0;
  std::uint64_t nonzero = 0;
  for (const auto& t : result.per_trial) {
    result.mean_agree_f1 += t.f1;
    result.mean_agree_f2 += t.f2;
    if (t.f1 != t.f2) {
      ++nonzero;
      positive += t.f1 > t.f2 ? 1 : 0;
    }
  }
  result.mean_agree_f1 /= static_cast<double>(options.trials);
  result.mean_agree_f2 /= static_cast<double>(options.trials);
  result.prefers_f1 = result.mean_agree_f1 > result.mean_agree_f2;
  result.sign_test_p = sign_test_p_value(positive, nonzero);
  result.decided = nonzero > 0 && result.sign_test_p < options.alpha &&
                   (positive * 2 > nonzero) == result.prefers_f1;
  return result;
}

struct BiasSweepOptions {
  /// Spacing of the p grid, in (0, 0.1]. The grid always contains 0, 0.5, 1.
  double grid_step = 0.05;
  PreferenceOptions preference{};
  MixtureOrientation orientation = MixtureOrientation::printed;
};

struct BiasStrengthResult {
  std::vector<PreferenceResult> curve;
  MixtureOrientation orientation = MixtureOrientation::printed;
  /// Printed orientation: the largest grid p where f1 is still preferred.
  /// Swapped orientation: the smallest such p. Empty when no point prefers
  /// f1 or when the curve is indeterminate.
  std::optional<double> flip_threshold;
  /// flip_threshold when it exceeds 0.5, the range in which it measures a
  /// bias toward f1.
  std::optional<double> strength;
  /// Preference for f1 at p = 0.5.
  bool biased_toward_f1_at_half = false;
  /// Decided preferences do not switch sides monotonically along p.
  bool indeterminate = false;
};

/// 0, step, 2*step, ..., 1 with 0.5 inserted when missing. Values are rounded
/// to 12 decimals to keep their printed form short.
inline std::vector<double> p_grid(double step) {
  if (!(step > 0.0 && step <= 0.1)) throw ParameterError("grid step must lie in (0, 0.1]");
  std::vector<double> grid;
  for (std::size_t g = 0;; ++g) {
    const double p = std::min(1.0, std::round(static_cast<double>(g) * step * 1e12) / 1e12);
    grid.push_back(p);
    if (p >= 1.0) break;
  }
  if (std::find(grid.begin(), grid.end(), 0.5) == grid.end()) {
    grid.insert(std::upper_bound(grid.begin(), grid.end(), 0.5), 0.5);
  }
  return grid;
}

/// Sweeps p across the grid and reads off the learner's preferential bias
/// toward f1 over f2.
inline BiasStrengthResult measure_bias_strength(const Learner& learner, const Concept& f1,
                                                const Concept& f2,
                                                const AttributeDistribution& base_dist,
                                                const AttributeDistribution& agree_dist,
                                                const BiasSweepOptions& options,
                                                std::uint64_t seed) {
  const auto grid = p_grid(options.grid_step);
  const SeedSpec seeds{seed};

  BiasStrengthResult result;
  result.orientation = options.orientation;
  result.curve.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    MixtureParams params{base_dist, grid[g], f1, f2, options.orientation};
    result.curve.push_back(
        measure_preference(learner, params, agree_dist, options.preference, seeds.derive("grid", g)));
    if (grid[g] == 0.5) result.biased_toward_f1_at_half = result.curve.back().prefers_f1;
  }

  // Along the direction in which evidence for f2 grows, a decided preference
  // for f1 must not follow a decided preference for f2.
  const bool printed = options.orientation == MixtureOrientation::printed;
  bool seen_f2 = false;
  for (std::size_t i = 0; i < result.curve.size(); ++i) {
    const auto& point = result.curve[printed ? i : result.curve.size() - 1 - i];
    if (!point.decided) continue;
    if (!point.prefers_f1) seen_f2 = true;
    else if (seen_f2) result.indeterminate = true;
  }

  if (!result.indeterminate) {
    for (const auto& point : result.curve) {
      if (!point.prefers_f1) continue;
      if (!result.flip_threshold || printed) result.flip_threshold = point.p;
    }
    if (result.flip_threshold && *result.flip_threshold > 0.5)
      result.strength = result.flip_threshold;
  }
  return result;
}

}  // namespace stabilimeter
