// Copyright 2026 The Stabilimeter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stabilimeter/agreement.hpp"
#include "stabilimeter/core.hpp"
#include "stabilimeter/distribution.hpp"
#include "stabilimeter/learners.hpp"
#include "stabilimeter/parallel.hpp"

namespace stabilimeter {

/// Worst-case standard deviation of the stability estimate over m splits.
inline double stability_worst_case_std(std::uint64_t m) {
  if (m < 1) throw ParameterError("m must be at least 1");
  return bernoulli_worst_case_std(m);
}

struct StabilityOptions {
  /// Outer repetitions (random half splits).
  std::uint64_t m = 20;
  /// Agreement samples per split.
  std::uint64_t n = 10'000;
  /// Drop iterations whose training fails instead of aborting. Off by
  /// default: silently dropped iterations bias the estimate.
  bool skip_failed_iterations = false;
  ExecutionPolicy execution{};
};

struct IterationRecord {
  /// Accuracy of the concept learned on the first half, tested on the second.
  Fraction acc1;
  /// Accuracy of the concept learned on the second half, tested on the first.
  Fraction acc2;
  /// Agreement of the two concepts over n draws from D_A.
  Fraction stab;
  std::optional<std::string> error;

  bool ok() const noexcept { return !error.has_value(); }
};

struct StabilityReport {
  double accuracy_estimate = 0.0;
  double stability_estimate = 0.0;
  std::uint64_t m = 0;
  std::uint64_t n = 0;
  std::vector<IterationRecord> iterations;
  double std_bound_stability = 0.0;
  double std_bound_agreement = 0.0;
  std::uint64_t master_seed = 0;

  std::size_t completed() const {
    std::size_t k = 0;
    for (const auto& r : iterations) k += r.ok() ? 1 : 0;
    return k;
  }
};

namespace detail {

/// Recomputes the two means from the per-iteration records.
inline void summarize(StabilityReport& report) {
  std::uint64_t agreeing = 0;
  std::uint64_t done = 0;
  double accuracy_sum = 0.0;
  for (const auto& r : report.iterations) {
    if (!r.ok()) continue;
    agreeing += r.stab.numerator;
    accuracy_sum += r.acc1.value() + r.acc2.value();
    ++done;
  }
  report.stability_estimate =
      static_cast<double>(agreeing) / (static_cast<double>(done) * static_cast<double>(report.n));
  report.accuracy_estimate = accuracy_sum / (2.0 * static_cast<double>(done));
}

}  // namespace detail

/// Repeated 2-fold estimate of predictive accuracy and stability.
///
/// For i in [0, m): split the data at random into halves t1 and t2; train on
/// each (t1 first, so learners with memory see t1 before t2); cross-test for
/// accuracy; and measure the agreement of the two concepts on n vectors drawn
/// from `dist`. Every iteration derives its own seeds from `master_seed`, so
/// the report does not depend on the execution policy.
inline StabilityReport estimate_stability_accuracy(const Learner& learner, const Dataset& data,
                                                   const AttributeDistribution& dist,
                                                   std::uint64_t master_seed,
                                                   const StabilityOptions& options = {}) {
  if (options.m < 1) throw ParameterError("m must be at least 1");
  if (options.n < 1) throw ParameterError("n must be at least 1");
  if (data.size() < 2) throw InputError("stability estimation needs at least two examples");
  if (!(dist.schema() == data.schema()))
    throw InputError("agreement distribution schema differs from the dataset's");

  const SeedSpec seeds{master_seed};
  StabilityReport report;
  report.m = options.m;
  report.n = options.n;
  report.master_seed = master_seed;
  report.std_bound_stability = stability_worst_case_std(options.m);
  report.std_bound_agreement = bernoulli_worst_case_std(options.n);
  report.iterations.resize(options.m);

  parallel_for(options.m, options.execution, [&](std::size_t i) {
    auto& record = report.iterations[i];
    const auto [t1, t2] = split_half(data, seeds.derive("split", i));
    const Dataset halves[] = {t1, t2};
    const std::uint64_t train_seeds[] = {seeds.derive("train1", i), seeds.derive("train2", i)};
    std::vector<Concept> learned;
    try {
      learned = learner.train_sequence(halves, train_seeds);
    } catch (const std::exception& e) {
      if (!options.skip_failed_iterations)
        throw LearnerError(i, "learner failed in iteration " + std::to_string(i) + ": " + e.what());
      record.error = e.what();
      return;
    }
    record.acc1 = evaluate_accuracy(learned[0], t2);
    record.acc2 = evaluate_accuracy(learned[1], t1);
    record.stab = estimate_agreement(learned[0], learned[1], dist, options.n,
                                     seeds.derive("agreement", i))
                      .fraction();
  });

  if (report.completed() == 0) throw LearnerError(0, "every iteration failed");
  detail::summarize(report);
  return report;
}

struct DriftAlarm {
  /// Pair (k, k + 1) of consecutive batches.
  std::size_t batch_pair_index = 0;
  double agreement = 0.0;
  double threshold = 0.0;
  bool fired = false;
};

/// Trains on each batch and compares consecutive concepts by agreement under
/// `dist`. Returns one entry per consecutive pair; `fired` marks alarms.
inline std::vector<DriftAlarm> monitor_drift(const Learner& learner,
                                             std::span<const Dataset> batches,
                                             const AttributeDistribution& dist, std::uint64_t n,
                                             double threshold, std::uint64_t seed,
                                             ExecutionPolicy policy = {}) {
  if (batches.size() < 2) throw InputError("drift monitoring needs at least two batches");
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw ParameterError("threshold must lie in [0, 1]");
  if (n < 1) throw ParameterError("n must be at least 1");

  const SeedSpec seeds{seed};
  std::vector<std::uint64_t> train_seeds(batches.size());
  for (std::size_t k = 0; k < batches.size(); ++k) train_seeds[k] = seeds.derive("train", k);

  std::vector<Concept> learned;
  try {
    learned = learner.train_sequence(batches, train_seeds);
  } catch (const std::exception& failure) {
    // Replay growing prefixes to name the batch that fails.
    for (std::size_t k = 0; k < batches.size(); ++k) {
      try {
        learner.train_sequence(batches.first(k + 1),
                               std::span<const std::uint64_t>(train_seeds).first(k + 1));
      } catch (const std::exception& e) {
        throw LearnerError(k, "learner failed on batch " + std::to_string(k) + ": " + e.what());
      }
    }
    throw LearnerError(batches.size() - 1, failure.what());
  }

  std::vector<DriftAlarm> alarms(batches.size() - 1);
  parallel_for(alarms.size(), policy, [&](std::size_t k) {
    const auto estimate =
        estimate_agreement(learned[k], learned[k + 1], dist, n, seeds.derive("agreement", k));
    alarms[k] = DriftAlarm{k, estimate.value(), threshold, estimate.value() < threshold};
  });
  return alarms;
}

}  // namespace stabilimeter
