// Copyright 2026 The Stabilimeter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stabilimeter/core.hpp"
#include "stabilimeter/random.hpp"

namespace stabilimeter {

/// A learning algorithm L: T -> F. Implementations are deterministic given
/// the dataset (content and order) and the seed, and safe to share across
/// threads.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual std::string name() const = 0;
  virtual Concept train(const Dataset& data, std::uint64_t seed) const = 0;

  /// Trains on each batch in order. Learners with memory thread it through
  /// the sequence; the default trains every batch independently.
  virtual std::vector<Concept> train_sequence(std::span<const Dataset> batches,
                                              std::span<const std::uint64_t> seeds) const {
    std::vector<Concept> out;
    out.reserve(batches.size());
    for (std::size_t i = 0; i < batches.size(); ++i) out.push_back(train(batches[i], seeds[i]));
    return out;
  }
};

using LearnerPtr = std::shared_ptr<const Learner>;

namespace detail {

inline double entropy(std::span<const std::size_t> counts, std::size_t total) {
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double q = static_cast<double>(c) / static_cast<double>(total);
    h -= q * std::log2(q);
  }
  return h;
}

/// Gain ratio of `attribute` over the examples selected by `rows`, and the
/// number of distinct levels observed there.
inline std::pair<double, std::size_t> gain_ratio_over(const Dataset& data,
                                                      std::span<const std::size_t> rows,
                                                      std::size_t attribute) {
  const std::size_t levels = data.schema().cardinality(attribute);
  const std::size_t classes = data.classes().size();
  std::vector<std::size_t> class_counts(classes, 0);
  std::vector<std::size_t> level_counts(levels, 0);
  std::vector<std::size_t> joint(levels * classes, 0);
  for (std::size_t r : rows) {
    const auto& e = data[r];
    const Level v = e.vector[attribute];
    ++class_counts[e.label.index];
    ++level_counts[v];
    ++joint[v * classes + e.label.index];
  }
  const std::size_t observed =
      static_cast<std::size_t>(std::count_if(level_counts.begin(), level_counts.end(),
                                             [](std::size_t c) { return c > 0; }));
  if (observed < 2) return {0.0, observed};

  const std::size_t n = rows.size();
  double conditional = 0.0;
  for (std::size_t v = 0; v < levels; ++v) {
    if (level_counts[v] == 0) continue;
    conditional += static_cast<double>(level_counts[v]) / static_cast<double>(n) *
                   entropy(std::span(joint).subspan(v * classes, classes), level_counts[v]);
  }
  const double gain = entropy(class_counts, n) - conditional;
  const double split = entropy(level_counts, n);
  if (split <= 0.0) return {0.0, observed};
  return {std::max(0.0, gain) / split, observed};
}

}  // namespace detail

/// Information gain of the attribute divided by its split information,
/// base-2 logarithms. 0 when fewer than two levels are observed.
inline double gain_ratio(const Dataset& data, std::size_t attribute) {
  if (data.empty()) throw InputError("gain_ratio needs a nonempty dataset");
  if (attribute >= data.schema().size())
    throw InputError("attribute index " + std::to_string(attribute) + " out of range");
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return detail::gain_ratio_over(data, rows, attribute).first;
}

struct TreeParams {
  /// Pre-pruning threshold; splits whose best gain ratio falls below it are
  /// not made. Larger values mean a stronger preference for small trees.
  double min_gain_ratio = 0.0;
  std::size_t max_depth = std::numeric_limits<std::size_t>::max();
  std::size_t min_leaf = 1;

  void validate() const {
    if (!(min_gain_ratio >= 0.0) || !std::isfinite(min_gain_ratio))
      throw ParameterError("min_gain_ratio must be a finite value >= 0");
    if (max_depth < 1) throw ParameterError("max_depth must be at least 1");
    if (min_leaf < 1) throw ParameterError("min_leaf must be at least 1");
  }
};

/// Decision tree with one child per attribute level. Nodes live in a flat
/// array, root first.
class DecisionTree final : public ConceptModel {
 public:
  struct Node {
    /// Split attribute, or nullopt for a leaf.
    std::optional<std::size_t> attribute;
    ClassLabel label;
    std::vector<std::size_t> children;
  };

  explicit DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw InputError("decision tree needs a root");
  }

  ClassLabel classify(std::span<const Level> v) const override {
    std::size_t at = 0;
    while (nodes_[at].attribute) at = nodes_[at].children[v[*nodes_[at].attribute]];
    return nodes_[at].label;
  }
  ConceptKind kind() const noexcept override { return ConceptKind::tree; }

  std::span<const Node> nodes() const noexcept { return nodes_; }
  std::size_t leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return !n.attribute; }));
  }

 private:
  std::vector<Node> nodes_;
};

/// Top-down induction by maximal gain ratio, ties toward the lowest
/// attribute index. Levels absent from a node's examples get a leaf with the
/// node's majority class.
inline Concept train_tree(const Dataset& data, const TreeParams& params = {}) {
  if (data.empty()) throw InputError("train_tree needs a nonempty dataset");
  params.validate();

  const auto& schema = data.schema();
  const std::size_t classes = data.classes().size();
  std::vector<DecisionTree::Node> nodes;

  // Ties within this margin count as exact; guards against last-bit
  // differences between logically equal splits.
  constexpr double kTieMargin = 1e-12;

  auto grow = [&](auto& self, std::vector<std::size_t> rows, std::size_t depth) -> std::size_t {
    std::vector<std::size_t> counts(classes, 0);
    for (std::size_t r : rows) ++counts[data[r].label.index];
    const ClassLabel majority = majority_label(counts);
    const std::size_t id = nodes.size();
    nodes.push_back({std::nullopt, majority, {}});

    const bool pure = std::count_if(counts.begin(), counts.end(),
                                    [](std::size_t c) { return c > 0; }) <= 1;
    if (pure || depth >= params.max_depth || rows.size() < params.min_leaf) return id;

    std::optional<std::size_t> best;
    double best_ratio = -1.0;
    for (std::size_t a = 0; a < schema.size(); ++a) {
      const auto [ratio, observed] = detail::gain_ratio_over(data, rows, a);
      if (observed < 2) continue;
      if (!best || ratio > best_ratio + kTieMargin) {
        best = a;
        best_ratio = ratio;
      }
    }
    if (!best || best_ratio < params.min_gain_ratio) return id;

    const std::size_t attribute = *best;
    std::vector<std::vector<std::size_t>> parts(schema.cardinality(attribute));
    for (std::size_t r : rows) parts[data[r].vector[attribute]].push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    std::vector<std::size_t> children;
    children.reserve(parts.size());
    for (auto& part : parts) {
      if (part.empty()) {
        children.push_back(nodes.size());
        nodes.push_back({std::nullopt, majority, {}});
      } else {
        children.push_back(self(self, std::move(part), depth + 1));
      }
    }
    nodes[id].attribute = attribute;
    nodes[id].children = std::move(children);
    return id;
  };

  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  grow(grow, std::move(all), 0);
  return Concept::make<DecisionTree>(data.domain(), std::move(nodes));
}

/// Constant concept predicting the most frequent class (ties toward the
/// lowest class index).
inline Concept train_majority(const Dataset& data) {
  if (data.empty()) throw InputError("train_majority needs a nonempty dataset");
  return constant_concept(data.domain(), majority_label(data.class_counts()));
}

/// k-nearest-neighbour concept under Hamming distance.
class InstanceConcept final : public ConceptModel {
 public:
  InstanceConcept(Dataset stored, std::size_t k) : stored_(std::move(stored)), k_(k) {}

  ClassLabel classify(std::span<const Level> v) const override {
    std::vector<std::pair<std::size_t, std::size_t>> ranked;  // (distance, index)
    ranked.reserve(stored_.size());
    for (std::size_t i = 0; i < stored_.size(); ++i) {
      const auto& x = stored_[i].vector;
      std::size_t d = 0;
      for (std::size_t a = 0; a < x.size(); ++a) d += x[a] != v[a] ? 1 : 0;
      ranked.emplace_back(d, i);
    }
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k_),
                      ranked.end());
    std::vector<std::size_t> votes(stored_.classes().size(), 0);
    for (std::size_t j = 0; j < k_; ++j) ++votes[stored_[ranked[j].second].label.index];
    return majority_label(votes);
  }
  ConceptKind kind() const noexcept override { return ConceptKind::instances; }

  const Dataset& stored() const noexcept { return stored_; }
  std::size_t k() const noexcept { return k_; }

 private:
  Dataset stored_;
  std::size_t k_;
};

inline Concept train_knn(const Dataset& data, std::size_t k) {
  if (data.empty()) throw InputError("train_knn needs a nonempty dataset");
  if (k < 1) throw ParameterError("k must be at least 1");
  if (k > data.size())
    throw ParameterError("k = " + std::to_string(k) + " exceeds the dataset size " +
                         std::to_string(data.size()));
  return Concept::make<InstanceConcept>(data.domain(), data, k);
}

class TreeLearner final : public Learner {
 public:
  explicit TreeLearner(TreeParams params = {}) : params_(params) { params_.validate(); }
  std::string name() const override { return "tree"; }
  Concept train(const Dataset& data, std::uint64_t) const override {
    return train_tree(data, params_);
  }
  const TreeParams& params() const noexcept { return params_; }

 private:
  TreeParams params_;
};

class KnnLearner final : public Learner {
 public:
  explicit KnnLearner(std::size_t k) : k_(k) {
    if (k_ < 1) throw ParameterError("k must be at least 1");
  }
  std::string name() const override { return "knn"; }
  Concept train(const Dataset& data, std::uint64_t) const override { return train_knn(data, k_); }

 private:
  std::size_t k_;
};

class MajorityLearner final : public Learner {
 public:
  std::string name() const override { return "majority"; }
  Concept train(const Dataset& data, std::uint64_t) const override { return train_majority(data); }
};

/// Ignores its data and always returns the same class.
class ConstantLearner final : public Learner {
 public:
  explicit ConstantLearner(ClassLabel label = {}) : label_(label) {}
  std::string name() const override { return "constant"; }
  Concept train(const Dataset& data, std::uint64_t) const override {
    return constant_concept(data.domain(), label_);
  }

 private:
  ClassLabel label_;
};

/// Always returns the given concept.
class FixedConceptLearner final : public Learner {
 public:
  explicit FixedConceptLearner(Concept fixed) : concept_(std::move(fixed)) {}
  std::string name() const override { return "fixed"; }
  Concept train(const Dataset& data, std::uint64_t) const override {
    if (!same_domain(data.domain(), concept_.domain()))
      throw InputError("fixed concept and dataset have different domains");
    return concept_;
  }

 private:
  Concept concept_;
};

/// Returns the candidate with the highest training accuracy. Exact ties are
/// broken uniformly at random from the seed, so the chooser has no built-in
/// preference among candidates.
class AccuracyChooser final : public Learner {
 public:
  explicit AccuracyChooser(std::vector<Concept> candidates) : candidates_(std::move(candidates)) {
    if (candidates_.empty()) throw ParameterError("chooser needs at least one candidate");
  }
  std::string name() const override { return "chooser"; }
  Concept train(const Dataset& data, std::uint64_t seed) const override {
    std::vector<std::size_t> tied;
    std::uint64_t best = 0;
    for (std::size_t i = 0; i < candidates_.size(); ++i) {
      const std::uint64_t hits = evaluate_accuracy(candidates_[i], data).numerator;
      if (tied.empty() || hits > best) {
        tied.assign(1, i);
        best = hits;
      } else if (hits == best) {
        tied.push_back(i);
      }
    }
    if (tied.size() == 1) return candidates_[tied.front()];
    Rng rng(seed);
    return candidates_[tied[static_cast<std::size_t>(rng.below(tied.size()))]];
  }

 private:
  std::vector<Concept> candidates_;
};

struct MemorizingState {
  std::optional<Concept> previous;
  /// Accuracy margin within which the remembered concept is kept.
  double epsilon = 0.0;
};

/// Trains `base` on the data and keeps the remembered concept unless the new
/// one beats it on this data by more than epsilon. The returned state
/// remembers whichever concept was output.
inline std::pair<Concept, MemorizingState> train_memorizing(const Learner& base,
                                                           MemorizingState state,
                                                           const Dataset& data,
                                                           std::uint64_t seed) {
  if (!(state.epsilon >= 0.0) || !std::isfinite(state.epsilon))
    throw ParameterError("epsilon must be a finite value >= 0");
  Concept fresh = base.train(data, seed);
  Concept output = fresh;
  if (state.previous) {
    const double gain =
        evaluate_accuracy(fresh, data).value() - evaluate_accuracy(*state.previous, data).value();
    if (gain <= state.epsilon) output = *state.previous;
  }
  state.previous = output;
  return {std::move(output), std::move(state)};
}

class MemorizingLearner final : public Learner {
 public:
  MemorizingLearner(LearnerPtr base, double epsilon) : base_(std::move(base)), epsilon_(epsilon) {
    if (!base_) throw ParameterError("memorizing learner needs a base learner");
    if (!(epsilon_ >= 0.0) || !std::isfinite(epsilon_))
      throw ParameterError("epsilon must be a finite value >= 0");
  }

  std::string name() const override { return "memorizing:" + base_->name(); }

  /// A single training run has nothing to remember yet.
  Concept train(const Dataset& data, std::uint64_t seed) const override {
    return base_->train(data, seed);
  }

  std::vector<Concept> train_sequence(std::span<const Dataset> batches,
                                      std::span<const std::uint64_t> seeds) const override {
    std::vector<Concept> out;
    out.reserve(batches.size());
    MemorizingState state{std::nullopt, epsilon_};
    for (std::size_t i = 0; i < batches.size(); ++i) {
      auto [learned, next] = train_memorizing(*base_, std::move(state), batches[i], seeds[i]);
      out.push_back(std::move(learned));
      state = std::move(next);
    }
    return out;
  }

  double epsilon() const noexcept { return epsilon_; }

 private:
  LearnerPtr base_;
  double epsilon_;
};

}  // namespace stabilimeter
