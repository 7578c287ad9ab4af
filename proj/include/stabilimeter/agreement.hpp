// Copyright 2026 The Stabilimeter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "stabilimeter/core.hpp"
#include "stabilimeter/distribution.hpp"
#include "stabilimeter/parallel.hpp"
#include "stabilimeter/random.hpp"

namespace stabilimeter {

/// Worst-case standard deviation of a mean of n Bernoulli draws: 0.5/sqrt(n).
inline double bernoulli_worst_case_std(std::uint64_t n) {
  return 0.5 / std::sqrt(static_cast<double>(n));
}

struct AgreementEstimate {
  std::uint64_t agreeing = 0;
  std::uint64_t sample_count = 0;
  double worst_case_std = 0.0;

  double value() const noexcept {
    return static_cast<double>(agreeing) / static_cast<double>(sample_count);
  }
  Fraction fraction() const noexcept { return Fraction{agreeing, sample_count}; }
};

/// Draws per seeding unit. Chunk c uses derive_seed(seed, "agreement", c),
/// so the count is identical however chunks are scheduled.
inline constexpr std::uint64_t kAgreementChunk = 4096;

namespace detail {

inline void check_agreement_inputs(const Concept& f1, const Concept& f2,
                                   const AttributeDistribution& dist) {
  if (!same_domain(f1.domain(), f2.domain()))
    throw InputError("concepts have different schemas or class sets");
  if (!(f1.domain()->schema == dist.schema()))
    throw InputError("distribution schema differs from the concepts' schema");
}

inline std::uint64_t count_agreements(const Concept& f1, const Concept& f2,
                                      const AttributeDistribution& dist, std::uint64_t draws,
                                      std::uint64_t seed) {
  Rng rng(seed);
  AttributeVector v(dist.schema().size());
  std::uint64_t hits = 0;
  for (std::uint64_t j = 0; j < draws; ++j) {
    dist.sample_into(rng, v);
    hits += f1(v) == f2(v) ? 1 : 0;
  }
  return hits;
}

}  // namespace detail

/// Fraction of n vectors drawn iid from `dist` on which f1 and f2 agree.
inline AgreementEstimate estimate_agreement(const Concept& f1, const Concept& f2,
                                            const AttributeDistribution& dist, std::uint64_t n,
                                            std::uint64_t seed,
                                            ExecutionPolicy policy = ExecutionPolicy::sequential()) {
  if (n < 1) throw ParameterError("agreement needs at least one sample");
  detail::check_agreement_inputs(f1, f2, dist);

  const std::uint64_t chunks = (n + kAgreementChunk - 1) / kAgreementChunk;
  std::vector<std::uint64_t> counts(chunks, 0);
  parallel_for(chunks, policy, [&](std::size_t c) {
    const std::uint64_t begin = c * kAgreementChunk;
    const std::uint64_t draws = std::min(kAgreementChunk, n - begin);
    counts[c] = detail::count_agreements(f1, f2, dist, draws, derive_seed(seed, "agreement", c));
  });

  AgreementEstimate estimate;
  for (auto c : counts) estimate.agreeing += c;
  estimate.sample_count = n;
  estimate.worst_case_std = bernoulli_worst_case_std(n);
  return estimate;
}

/// Probability mass on which f1 and f2 agree, by full enumeration of the
/// distribution's support. Exact for uniform and table distributions.
inline Fraction exact_agreement(const Concept& f1, const Concept& f2,
                                const AttributeDistribution& dist,
                                std::uint64_t max_vectors = kDefaultEnumerationBound) {
  detail::check_agreement_inputs(f1, f2, dist);
  std::uint64_t agreeing = 0;
  dist.for_each_weighted(
      [&](const AttributeVector& v, std::uint64_t weight) {
        if (f1(v) == f2(v)) agreeing += weight;
      },
      max_vectors);
  return Fraction::reduced(agreeing, dist.total_weight());
}

/// Agreement 1 under a strictly positive distribution, i.e. identical
/// behaviour on every vector of A.
inline bool materially_equivalent(const Concept& f1, const Concept& f2,
                                  const AttributeDistribution& dist,
                                  std::uint64_t max_vectors = kDefaultEnumerationBound) {
  if (!dist.strictly_positive())
    throw ParameterError(
        "material equivalence needs a distribution that is positive on every vector");
  return exact_agreement(f1, f2, dist, max_vectors).is_one();
}

}  // namespace stabilimeter
