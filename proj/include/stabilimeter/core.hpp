// Copyright 2026 The Stabilimeter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <unordered_set>
#include <utility>
#include <vector>

#include "stabilimeter/error.hpp"

namespace stabilimeter {

/// Index of a level within one attribute's domain.
using Level = std::uint32_t;

/// One value per schema attribute, stored as level indices.
using AttributeVector = std::vector<Level>;

struct Attribute {
  std::string name;
  std::vector<std::string> levels;

  std::size_t cardinality() const noexcept { return levels.size(); }
  friend bool operator==(const Attribute&, const Attribute&) = default;
};

/// Size of a product space, saturating at uint64 max.
struct SpaceSize {
  std::uint64_t value = 1;
  bool saturated = false;

  bool at_most(std::uint64_t bound) const noexcept {
    return !saturated && value <= bound;
  }
};

/// Ordered list of finite categorical attributes. Boolean attributes are
/// the cardinality-2 case with levels {"0", "1"}.
class AttributeSchema {
 public:
  explicit AttributeSchema(std::vector<Attribute> attributes)
      : attributes_(std::move(attributes)) {
    if (attributes_.empty()) throw InputError("schema needs at least one attribute");
    std::unordered_set<std::string> names;
    for (const auto& a : attributes_) {
      if (a.name.empty()) throw InputError("attribute names must be nonempty");
      if (!names.insert(a.name).second)
        throw InputError("duplicate attribute name '" + a.name + "'");
      if (a.cardinality() < 2)
        throw InputError("attribute '" + a.name + "' needs at least two levels");
      std::unordered_set<std::string> levels(a.levels.begin(), a.levels.end());
      if (levels.size() != a.levels.size())
        throw InputError("attribute '" + a.name + "' has duplicate levels");
    }
  }

  /// `count` boolean attributes named x0, x1, ...
  static AttributeSchema boolean(std::size_t count) {
    std::vector<Attribute> attributes;
    attributes.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
      attributes.push_back({"x" + std::to_string(i), {"0", "1"}});
    return AttributeSchema(std::move(attributes));
  }

  std::size_t size() const noexcept { return attributes_.size(); }
  const Attribute& operator[](std::size_t i) const { return attributes_.at(i); }
  std::span<const Attribute> attributes() const noexcept { return attributes_; }
  std::size_t cardinality(std::size_t i) const { return attributes_.at(i).cardinality(); }

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < attributes_.size(); ++i)
      if (attributes_[i].name == name) return i;
    return std::nullopt;
  }

  std::optional<Level> level_index(std::size_t attribute, std::string_view level) const {
    const auto& levels = attributes_.at(attribute).levels;
    for (std::size_t i = 0; i < levels.size(); ++i)
      if (levels[i] == level) return static_cast<Level>(i);
    return std::nullopt;
  }

  SpaceSize space_size() const noexcept {
    SpaceSize size;
    for (const auto& a : attributes_) {
      const std::uint64_t c = a.cardinality();
      if (size.value > std::numeric_limits<std::uint64_t>::max() / c) {
        size.saturated = true;
        size.value = std::numeric_limits<std::uint64_t>::max();
        return size;
      }
      size.value *= c;
    }
    return size;
  }

  bool conforms(std::span<const Level> vector) const noexcept {
    if (vector.size() != attributes_.size()) return false;
    for (std::size_t i = 0; i < vector.size(); ++i)
      if (vector[i] >= attributes_[i].cardinality()) return false;
    return true;
  }

  friend bool operator==(const AttributeSchema&, const AttributeSchema&) = default;

 private:
  std::vector<Attribute> attributes_;
};

/// The finite class set C, |C| >= 2.
class ClassSet {
 public:
  explicit ClassSet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.size() < 2) throw InputError("class set needs at least two classes");
    std::unordered_set<std::string> seen(names_.begin(), names_.end());
    if (seen.size() != names_.size()) throw InputError("duplicate class names");
  }

  static ClassSet binary() { return ClassSet({"0", "1"}); }

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  std::span<const std::string> names() const noexcept { return names_; }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return i;
    return std::nullopt;
  }

  friend bool operator==(const ClassSet&, const ClassSet&) = default;

 private:
  std::vector<std::string> names_;
};

struct ClassLabel {
  std::size_t index = 0;
  friend auto operator<=>(const ClassLabel&, const ClassLabel&) = default;
};

/// Schema and class set shared by datasets, concepts and distributions.
struct Domain {
  AttributeSchema schema;
  ClassSet classes;

  friend bool operator==(const Domain&, const Domain&) = default;
};

using DomainPtr = std::shared_ptr<const Domain>;

inline DomainPtr make_domain(AttributeSchema schema, ClassSet classes) {
  return std::make_shared<const Domain>(Domain{std::move(schema), std::move(classes)});
}

inline DomainPtr boolean_domain(std::size_t attributes) {
  return make_domain(AttributeSchema::boolean(attributes), ClassSet::binary());
}

inline bool same_domain(const DomainPtr& a, const DomainPtr& b) {
  return a == b || (a && b && *a == *b);
}

/// An exact count ratio. Kept unreduced unless built through reduced().
struct Fraction {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;

  static Fraction reduced(std::uint64_t num, std::uint64_t den) {
    const std::uint64_t g = std::gcd(num, den);
    return g == 0 ? Fraction{0, 1} : Fraction{num / g, den / g};
  }

  double value() const noexcept {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
  bool is_one() const noexcept { return numerator == denominator; }
  bool is_zero() const noexcept { return numerator == 0; }

  /// Equality of the represented rational values.
  friend bool operator==(const Fraction& a, const Fraction& b) {
    return static_cast<unsigned __int128>(a.numerator) * b.denominator ==
           static_cast<unsigned __int128>(b.numerator) * a.denominator;
  }
};

struct LabeledExample {
  AttributeVector vector;
  ClassLabel label;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

/// Which seed and purpose produced a sampled dataset.
struct Provenance {
  std::uint64_t seed = 0;
  std::string purpose;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

class Dataset {
 public:
  Dataset(DomainPtr domain, std::vector<LabeledExample> examples,
          std::optional<Provenance> provenance = std::nullopt)
      : domain_(std::move(domain)),
        examples_(std::move(examples)),
        provenance_(std::move(provenance)) {
    if (!domain_) throw InputError("dataset needs a domain");
    for (std::size_t i = 0; i < examples_.size(); ++i) {
      if (!domain_->schema.conforms(examples_[i].vector))
        throw InputError("example " + std::to_string(i) + " does not conform to the schema");
      if (examples_[i].label.index >= domain_->classes.size())
        throw InputError("example " + std::to_string(i) + " has an unknown class");
    }
  }

  const DomainPtr& domain() const noexcept { return domain_; }
  const AttributeSchema& schema() const noexcept { return domain_->schema; }
  const ClassSet& classes() const noexcept { return domain_->classes; }

  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }
  const LabeledExample& operator[](std::size_t i) const { return examples_[i]; }
  std::span<const LabeledExample> examples() const noexcept { return examples_; }
  auto begin() const noexcept { return examples_.begin(); }
  auto end() const noexcept { return examples_.end(); }

  const std::optional<Provenance>& provenance() const noexcept { return provenance_; }

  Dataset subset(std::span<const std::size_t> indices) const {
    std::vector<LabeledExample> picked;
    picked.reserve(indices.size());
    for (std::size_t i : indices) picked.push_back(examples_.at(i));
    return Dataset(domain_, std::move(picked));
  }

  /// Per-class counts, indexed by class.
  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(classes().size(), 0);
    for (const auto& e : examples_) ++counts[e.label.index];
    return counts;
  }

  /// Content equality; provenance is ignored.
  friend bool operator==(const Dataset& a, const Dataset& b) {
    return same_domain(a.domain_, b.domain_) && a.examples_ == b.examples_;
  }

 private:
  DomainPtr domain_;
  std::vector<LabeledExample> examples_;
  std::optional<Provenance> provenance_;
};

enum class ConceptKind { constant, tree, instances, formula, custom };

/// Behaviour behind a Concept. Implementations must be total over
/// schema-conforming vectors, deterministic, and safe to call concurrently.
class ConceptModel {
 public:
  virtual ~ConceptModel() = default;
  virtual ClassLabel classify(std::span<const Level> vector) const = 0;
  virtual ConceptKind kind() const noexcept = 0;
};

/// A total function from attribute vectors to class labels. Cheap to copy;
/// the model is shared and immutable.
class Concept {
 public:
  Concept(DomainPtr domain, std::shared_ptr<const ConceptModel> model)
      : domain_(std::move(domain)), model_(std::move(model)) {
    if (!domain_ || !model_) throw InputError("concept needs a domain and a model");
  }

  template <typename Model, typename... Args>
  static Concept make(DomainPtr domain, Args&&... args) {
    static_assert(std::is_base_of_v<ConceptModel, Model>);
    return Concept(std::move(domain),
                   std::make_shared<const Model>(std::forward<Args>(args)...));
  }

  ClassLabel classify(std::span<const Level> vector) const { return model_->classify(vector); }
  ClassLabel operator()(std::span<const Level> vector) const { return model_->classify(vector); }

  ConceptKind kind() const noexcept { return model_->kind(); }
  const DomainPtr& domain() const noexcept { return domain_; }
  const ConceptModel& model() const noexcept { return *model_; }

  /// The concrete model, or nullptr when it has a different type.
  template <typename Model>
  const Model* as() const noexcept {
    return dynamic_cast<const Model*>(model_.get());
  }

  /// True when both handles share the same model object.
  bool same_model(const Concept& other) const noexcept { return model_ == other.model_; }

 private:
  DomainPtr domain_;
  std::shared_ptr<const ConceptModel> model_;
};

class ConstantConcept final : public ConceptModel {
 public:
  explicit ConstantConcept(ClassLabel label) : label_(label) {}
  ClassLabel classify(std::span<const Level>) const override { return label_; }
  ConceptKind kind() const noexcept override { return ConceptKind::constant; }
  ClassLabel label() const noexcept { return label_; }

 private:
  ClassLabel label_;
};

/// Wraps an arbitrary callable. Not serializable.
template <typename Fn>
class FunctionConcept final : public ConceptModel {
 public:
  explicit FunctionConcept(Fn fn) : fn_(std::move(fn)) {}
  ClassLabel classify(std::span<const Level> v) const override { return fn_(v); }
  ConceptKind kind() const noexcept override { return ConceptKind::custom; }

 private:
  Fn fn_;
};

inline Concept constant_concept(DomainPtr domain, ClassLabel label) {
  if (label.index >= domain->classes.size()) throw InputError("constant class out of range");
  return Concept::make<ConstantConcept>(std::move(domain), label);
}

template <typename Fn>
Concept function_concept(DomainPtr domain, Fn fn) {
  return Concept::make<FunctionConcept<Fn>>(std::move(domain), std::move(fn));
}

/// Concept flipping every label of a binary concept.
inline Concept complement(const Concept& f) {
  if (f.domain()->classes.size() != 2) throw InputError("complement needs a binary class set");
  return function_concept(f.domain(), [f](std::span<const Level> v) {
    return ClassLabel{1 - f(v).index};
  });
}

/// Fraction of examples the concept labels correctly, as an exact count ratio.
inline Fraction evaluate_accuracy(const Concept& f, const Dataset& data) {
  if (data.empty()) throw InputError("accuracy needs a nonempty dataset");
  if (!same_domain(f.domain(), data.domain()))
    throw InputError("concept and dataset have different schemas or classes");
  std::uint64_t hits = 0;
  for (const auto& e : data) hits += f(e.vector) == e.label ? 1 : 0;
  return Fraction{hits, data.size()};
}

/// Most frequent class, ties toward the lowest class index.
inline ClassLabel majority_label(std::span<const std::size_t> class_counts) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < class_counts.size(); ++c)
    if (class_counts[c] > class_counts[best]) best = c;
  return ClassLabel{best};
}

/// Calls fn(vector) for every vector of the schema in odometer order
/// (last attribute fastest).
template <typename Fn>
void for_each_vector(const AttributeSchema& schema, Fn&& fn) {
  AttributeVector v(schema.size(), 0);
  for (;;) {
    fn(std::as_const(v));
    std::size_t i = schema.size();
    while (i > 0) {
      --i;
      if (++v[i] < schema.cardinality(i)) break;
      v[i] = 0;
      if (i == 0) return;
    }
  }
}

}  // namespace stabilimeter
