// Copyright 2026 The Stabilimeter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "stabilimeter/core.hpp"
#include "stabilimeter/random.hpp"

namespace stabilimeter {

/// Largest space exact_agreement and friends will enumerate by default.
inline constexpr std::uint64_t kDefaultEnumerationBound = std::uint64_t{1} << 24;

/// A distribution over attribute vectors (D_A). Uniform is the default used
/// for agreement; empirical and table kinds carry integer weights so that
/// enumeration stays exact; custom kinds wrap a sampler and cannot be
/// enumerated.
class AttributeDistribution {
 public:
  using Sampler = std::function<void(Rng&, std::span<Level>)>;

  enum class Kind { uniform, table, custom };

  static AttributeDistribution uniform(AttributeSchema schema) {
    return AttributeDistribution(Kind::uniform, std::move(schema));
  }

  /// Explicit table of (vector, weight) entries. Zero weights are dropped.
  static AttributeDistribution table(AttributeSchema schema,
                                     std::vector<std::pair<AttributeVector, std::uint64_t>> entries) {
    AttributeDistribution d(Kind::table, std::move(schema));
    std::map<AttributeVector, std::uint64_t> merged;
    for (auto& [v, w] : entries) {
      if (!d.schema_.conforms(v)) throw InputError("table entry does not conform to the schema");
      if (w > 0) merged[std::move(v)] += w;
    }
    if (merged.empty()) throw ParameterError("table distribution has no positive weight");
    std::uint64_t total = 0;
    for (auto& [v, w] : merged) {
      total += w;
      d.vectors_.push_back(v);
      d.cumulative_.push_back(total);
    }
    return d;
  }

  /// Resampling of the dataset's vectors (each row equally likely).
  static AttributeDistribution empirical(const Dataset& data) {
    if (data.empty()) throw InputError("empirical distribution needs a nonempty dataset");
    std::vector<std::pair<AttributeVector, std::uint64_t>> entries;
    entries.reserve(data.size());
    for (const auto& e : data) entries.emplace_back(e.vector, 1);
    return table(data.schema(), std::move(entries));
  }

  static AttributeDistribution custom(AttributeSchema schema, Sampler sampler) {
    AttributeDistribution d(Kind::custom, std::move(schema));
    d.sampler_ = std::make_shared<const Sampler>(std::move(sampler));
    return d;
  }

  Kind kind() const noexcept { return kind_; }
  const AttributeSchema& schema() const noexcept { return schema_; }

  void sample_into(Rng& rng, std::span<Level> out) const {
    switch (kind_) {
      case Kind::uniform:
        for (std::size_t i = 0; i < out.size(); ++i)
          out[i] = static_cast<Level>(rng.below(schema_.cardinality(i)));
        return;
      case Kind::table: {
        const std::uint64_t r = rng.below(cumulative_.back());
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
        const auto& v = vectors_[static_cast<std::size_t>(it - cumulative_.begin())];
        std::copy(v.begin(), v.end(), out.begin());
        return;
      }
      case Kind::custom:
        (*sampler_)(rng, out);
        return;
    }
  }

  AttributeVector sample(Rng& rng) const {
    AttributeVector v(schema_.size());
    sample_into(rng, v);
    return v;
  }

  /// Number of support points an exhaustive pass would visit.
  SpaceSize support_size() const noexcept {
    switch (kind_) {
      case Kind::uniform: return schema_.space_size();
      case Kind::table: return SpaceSize{vectors_.size(), false};
      case Kind::custom: return SpaceSize{0, true};
    }
    return SpaceSize{0, true};
  }

  bool enumerable(std::uint64_t bound = kDefaultEnumerationBound) const noexcept {
    return kind_ != Kind::custom && support_size().at_most(bound);
  }

  /// Every vector of A has nonzero probability.
  bool strictly_positive() const noexcept {
    if (kind_ == Kind::uniform) return true;
    if (kind_ == Kind::table) {
      const auto space = schema_.space_size();
      return !space.saturated && space.value == vectors_.size();
    }
    return false;
  }

  std::uint64_t total_weight() const noexcept {
    if (kind_ == Kind::uniform) return schema_.space_size().value;
    if (kind_ == Kind::table) return cumulative_.back();
    return 0;
  }

  /// Calls fn(vector, weight) over the support; weights sum to total_weight().
  template <typename Fn>
  void for_each_weighted(Fn&& fn, std::uint64_t bound = kDefaultEnumerationBound) const {
    if (kind_ == Kind::custom)
      throw CapacityError("custom distributions cannot be enumerated; use sampling");
    if (!support_size().at_most(bound))
      throw CapacityError("support exceeds the enumeration bound of " + std::to_string(bound) +
                          " vectors; use Monte Carlo estimation instead");
    if (kind_ == Kind::uniform) {
      for_each_vector(schema_, [&](const AttributeVector& v) { fn(v, std::uint64_t{1}); });
      return;
    }
    std::uint64_t previous = 0;
    for (std::size_t i = 0; i < vectors_.size(); ++i) {
      fn(std::as_const(vectors_[i]), cumulative_[i] - previous);
      previous = cumulative_[i];
    }
  }

 private:
  AttributeDistribution(Kind kind, AttributeSchema schema)
      : kind_(kind), schema_(std::move(schema)) {}

  Kind kind_;
  AttributeSchema schema_;
  std::vector<AttributeVector> vectors_;
  std::vector<std::uint64_t> cumulative_;
  std::shared_ptr<const Sampler> sampler_;
};

/// How the mixture weight p is attached to the two concepts.
enum class MixtureOrientation {
  /// Labels come from f2 with probability p and from f1 with 1 - p.
  printed,
  /// Roles swapped: labels come from f1 with probability p.
  swapped,
};

/// Parameters of the mixture family D°(a, c | D'_A, p, f1, f2).
struct MixtureParams {
  AttributeDistribution base;
  double p = 0.5;
  Concept f1;
  Concept f2;
  MixtureOrientation orientation = MixtureOrientation::printed;

  void validate() const {
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("mixture p must lie in [0, 1]");
    if (!same_domain(f1.domain(), f2.domain()))
      throw InputError("mixture concepts must share schema and classes");
    if (!(base.schema() == f1.domain()->schema))
      throw InputError("mixture base distribution schema differs from the concepts'");
  }

  /// Probability that a label is drawn from f2.
  double weight_on_f2() const noexcept {
    return orientation == MixtureOrientation::printed ? p : 1.0 - p;
  }
};

/// Target concept with a label-flip rate. Flipped labels move to a uniformly
/// chosen other class.
struct ConceptWithNoise {
  Concept target;
  AttributeDistribution attributes;
  double flip_rate = 0.0;
};

/// A distribution over A x C (D_{A x C}).
class LabeledDistribution {
 public:
  struct Resample {
    Dataset data;
  };
  using Variant = std::variant<ConceptWithNoise, MixtureParams, Resample>;

  LabeledDistribution(ConceptWithNoise spec) : spec_(std::move(spec)) {  // NOLINT
    const auto& s = std::get<ConceptWithNoise>(spec_);
    if (!(s.flip_rate >= 0.0 && s.flip_rate <= 1.0))
      throw ParameterError("label flip rate must lie in [0, 1]");
    if (!(s.attributes.schema() == s.target.domain()->schema))
      throw InputError("attribute distribution schema differs from the target concept's");
    domain_ = s.target.domain();
  }

  LabeledDistribution(MixtureParams spec) : spec_(std::move(spec)) {  // NOLINT
    const auto& s = std::get<MixtureParams>(spec_);
    s.validate();
    domain_ = s.f1.domain();
  }

  LabeledDistribution(Resample spec) : spec_(std::move(spec)) {  // NOLINT
    const auto& s = std::get<Resample>(spec_);
    if (s.data.empty()) throw InputError("resampling needs a nonempty dataset");
    domain_ = s.data.domain();
  }

  const DomainPtr& domain() const noexcept { return domain_; }
  const Variant& spec() const noexcept { return spec_; }

  LabeledExample sample(Rng& rng) const {
    return std::visit([&](const auto& s) { return draw(s, rng); }, spec_);
  }

 private:
  LabeledExample draw(const ConceptWithNoise& s, Rng& rng) const {
    LabeledExample e{s.attributes.sample(rng), {}};
    e.label = s.target(e.vector);
    if (s.flip_rate > 0.0 && rng.bernoulli(s.flip_rate)) {
      const std::size_t other = rng.below(domain_->classes.size() - 1);
      e.label.index = other >= e.label.index ? other + 1 : other;
    }
    return e;
  }

  LabeledExample draw(const MixtureParams& s, Rng& rng) const {
    LabeledExample e{s.base.sample(rng), {}};
    const bool from_f2 = rng.bernoulli(s.weight_on_f2());
    e.label = from_f2 ? s.f2(e.vector) : s.f1(e.vector);
    return e;
  }

  LabeledExample draw(const Resample& s, Rng& rng) const {
    return s.data[static_cast<std::size_t>(rng.below(s.data.size()))];
  }

  Variant spec_;
  DomainPtr domain_;
};

/// `size` iid draws from `dist`, fully determined by `seed`.
inline Dataset sample_dataset(const LabeledDistribution& dist, std::size_t size,
                              std::uint64_t seed) {
  if (size < 1) throw ParameterError("sample size must be at least 1");
  Rng rng(seed);
  std::vector<LabeledExample> examples;
  examples.reserve(size);
  for (std::size_t i = 0; i < size; ++i) examples.push_back(dist.sample(rng));
  return Dataset(dist.domain(), std::move(examples), Provenance{seed, "sample"});
}

/// Uniformly random partition into halves of sizes floor(n/2) and ceil(n/2).
/// Each half keeps the input order of its examples.
inline std::pair<Dataset, Dataset> split_half(const Dataset& data, std::uint64_t seed) {
  if (data.size() < 2) throw InputError("split_half needs at least two examples");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const auto middle = order.begin() + static_cast<std::ptrdiff_t>(data.size() / 2);
  std::sort(order.begin(), middle);
  std::sort(middle, order.end());
  std::span<const std::size_t> all(order);
  return {data.subset(all.first(data.size() / 2)), data.subset(all.subspan(data.size() / 2))};
}

}  // namespace stabilimeter
