// Copyright 2026 The Stabilimeter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "stabilimeter/agreement.hpp"
#include "stabilimeter/bias.hpp"
#include "stabilimeter/core.hpp"
#include "stabilimeter/formula.hpp"
#include "stabilimeter/learners.hpp"
#include "stabilimeter/stability.hpp"

// Concept documents:
//
//   {"attributes": [{"name": "x0", "levels": ["0", "1"]}, ...],
//    "classes": ["0", "1"],
//    "concept": NODE}
//
// where NODE is one of
//   {"leaf": "<class name>"}                          constant or tree leaf
//   {"attribute": i, "children": [NODE, ...]}         tree split, one child per level
//   {"k": K, "instances": [[l0, ..., lk, class], ...]} stored instances (indices)
//   {"formula": "(and (var 0) (var 1))"}              boolean formula

namespace stabilimeter::io {

using nlohmann::json;

namespace detail {

inline json tree_node_json(const DecisionTree& tree, std::size_t at, const ClassSet& classes) {
  const auto& node = tree.nodes()[at];
  if (!node.attribute) return json{{"leaf", classes.name(node.label.index)}};
  json children = json::array();
  for (std::size_t child : node.children) children.push_back(tree_node_json(tree, child, classes));
  return json{{"attribute", *node.attribute}, {"children", std::move(children)}};
}

[[noreturn]] inline void bad_concept(const std::string& what) {
  throw ParseError("concept", 0, what);
}

inline ClassLabel class_from_json(const json& j, const ClassSet& classes) {
  if (!j.is_string()) bad_concept("leaf class must be a class name");
  const auto index = classes.index_of(j.get<std::string>());
  if (!index) bad_concept("unknown class '" + j.get<std::string>() + "'");
  return ClassLabel{*index};
}

inline void tree_from_json(const json& j, const Domain& domain, std::vector<DecisionTree::Node>& nodes,
                           std::size_t depth = 0) {
  if (depth > 10'000) bad_concept("tree too deep");
  const std::size_t id = nodes.size();
  if (j.contains("leaf")) {
    nodes.push_back({std::nullopt, class_from_json(j.at("leaf"), domain.classes), {}});
    return;
  }
  if (!j.contains("attribute") || !j.contains("children")) bad_concept("malformed tree node");
  const auto attribute = j.at("attribute").get<std::size_t>();
  if (attribute >= domain.schema.size()) bad_concept("split attribute out of range");
  const auto& children = j.at("children");
  if (!children.is_array() || children.size() != domain.schema.cardinality(attribute))
    bad_concept("a split needs one child per level of its attribute");
  nodes.push_back({attribute, ClassLabel{0}, {}});
  std::vector<std::size_t> ids;
  for (const auto& child : children) {
    ids.push_back(nodes.size());
    tree_from_json(child, domain, nodes, depth + 1);
  }
  nodes[id].children = std::move(ids);
}

}  // namespace detail

inline json domain_to_json(const Domain& domain) {
  json attributes = json::array();
  for (const auto& a : domain.schema.attributes())
    attributes.push_back({{"name", a.name}, {"levels", a.levels}});
  return json{{"attributes", std::move(attributes)},
              {"classes", std::vector<std::string>(domain.classes.names().begin(),
                                                   domain.classes.names().end())}};
}

inline DomainPtr domain_from_json(const json& j) {
  try {
    std::vector<Attribute> attributes;
    for (const auto& a : j.at("attributes"))
      attributes.push_back({a.at("name").get<std::string>(),
                            a.at("levels").get<std::vector<std::string>>()});
    return make_domain(AttributeSchema(std::move(attributes)),
                       ClassSet(j.at("classes").get<std::vector<std::string>>()));
  } catch (const json::exception& e) {
    throw ParseError("concept", 0, std::string("bad domain: ") + e.what());
  } catch (const InputError& e) {
    throw ParseError("concept", 0, e.what());
  }
}

/// Serializes constant, tree, instance and formula concepts. Concepts backed
/// by arbitrary callables cannot be written.
inline json concept_to_json(const Concept& f) {
  const auto& domain = *f.domain();
  json node;
  if (const auto* c = f.as<ConstantConcept>()) {
    node = json{{"leaf", domain.classes.name(c->label().index)}};
  } else if (const auto* t = f.as<DecisionTree>()) {
    node = detail::tree_node_json(*t, 0, domain.classes);
  } else if (const auto* k = f.as<InstanceConcept>()) {
    json rows = json::array();
    for (const auto& e : k->stored()) {
      json row(e.vector);
      row.push_back(e.label.index);
      rows.push_back(std::move(row));
    }
    node = json{{"k", k->k()}, {"instances", std::move(rows)}};
  } else if (const auto* b = f.as<FormulaConcept>()) {
    node = json{{"formula", b->formula().to_string()}};
  } else {
    throw InputError("this concept kind cannot be serialized");
  }
  json doc = domain_to_json(domain);
  doc["concept"] = std::move(node);
  return doc;
}

inline Concept concept_from_json(const json& doc) {
  const DomainPtr domain = domain_from_json(doc);
  if (!doc.contains("concept")) detail::bad_concept("missing 'concept'");
  const json& node = doc.at("concept");
  try {
    if (node.contains("formula"))
      return formula_concept(BooleanFormula::parse(node.at("formula").get<std::string>()), domain);
    if (node.contains("k")) {
      std::vector<LabeledExample> examples;
      for (const auto& row : node.at("instances")) {
        auto values = row.get<std::vector<std::size_t>>();
        if (values.size() != domain->schema.size() + 1) detail::bad_concept("bad instance row");
        LabeledExample e;
        e.label = ClassLabel{values.back()};
        values.pop_back();
        e.vector.assign(values.begin(), values.end());
        examples.push_back(std::move(e));
      }
      return train_knn(Dataset(domain, std::move(examples)), node.at("k").get<std::size_t>());
    }
    if (node.contains("leaf") && node.size() == 1)
      return constant_concept(domain, detail::class_from_json(node.at("leaf"), domain->classes));
    std::vector<DecisionTree::Node> nodes;
    detail::tree_from_json(node, *domain, nodes);
    return Concept::make<DecisionTree>(domain, std::move(nodes));
  } catch (const json::exception& e) {
    throw ParseError("concept", 0, e.what());
  } catch (const InputError& e) {
    throw ParseError("concept", 0, e.what());
  } catch (const ParameterError& e) {
    throw ParseError("concept", 0, e.what());
  }
}

/// Reads a concept document, or a bare formula s-expression. A bare
/// formula gets a boolean domain of `formula_width` attributes, or of its own
/// variable count when that is 0.
inline Concept read_concept_file(const std::filesystem::path& path, std::size_t formula_width = 0) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open concept file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string::npos && text[first] == '{')
      return concept_from_json(json::parse(text));
    const auto formula = BooleanFormula::parse(text);
    const std::size_t width = std::max<std::size_t>(
        {formula_width, formula.variable_count(), std::size_t{1}});
    return formula_concept(formula, width);
  } catch (const json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  } catch (const ParseError& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

inline json fraction_json(const Fraction& f) {
  return json{{"numerator", f.numerator}, {"denominator", f.denominator}};
}

inline json to_json(const AgreementEstimate& a) {
  return json{{"value", a.value()},
              {"agreeing", a.agreeing},
              {"sample_count", a.sample_count},
              {"worst_case_std", a.worst_case_std}};
}

inline json to_json(const StabilityReport& r) {
  json iterations = json::array();
  for (const auto& it : r.iterations) {
    if (it.ok())
      iterations.push_back({{"acc1", it.acc1.value()}, {"acc2", it.acc2.value()},
                            {"stab", it.stab.value()}});
    else
      iterations.push_back({{"error", *it.error}});
  }
  return json{{"accuracy_estimate", r.accuracy_estimate},
              {"stability_estimate", r.stability_estimate},
              {"m", r.m},
              {"n", r.n},
              {"iterations", std::move(iterations)},
              {"std_bound_stability", r.std_bound_stability},
              {"std_bound_agreement", r.std_bound_agreement},
              {"master_seed", r.master_seed}};
}

/// Per-iteration series: iteration,acc1,acc2,stab.
inline void write_csv(std::ostream& out, const StabilityReport& r) {
  out << "iteration,acc1,acc2,stab\n";
  for (std::size_t i = 0; i < r.iterations.size(); ++i) {
    const auto& it = r.iterations[i];
    if (!it.ok()) continue;
    out << i << ',' << json(it.acc1.value()).dump() << ',' << json(it.acc2.value()).dump() << ','
        << json(it.stab.value()).dump() << '\n';
  }
}

inline json to_json(const BiasStrengthResult& r) {
  json curve = json::array();
  for (const auto& point : r.curve)
    curve.push_back({{"p", point.p},
                     {"mean_agree_f1", point.mean_agree_f1},
                     {"mean_agree_f2", point.mean_agree_f2},
                     {"decided", point.decided},
                     {"prefers_f1", point.prefers_f1},
                     {"sign_test_p", point.sign_test_p},
                     {"trials", point.trials}});
  auto optional_number = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return json{{"curve", std::move(curve)},
              {"orientation", r.orientation == MixtureOrientation::printed ? "printed" : "swapped"},
              {"flip_threshold", optional_number(r.flip_threshold)},
              {"strength", optional_number(r.strength)},
              {"biased_toward_f1_at_half", r.biased_toward_f1_at_half},
              {"indeterminate", r.indeterminate}};
}

/// Preference curve for plotting: p, mean_agree_f1 - mean_agree_f2.
inline void write_csv(std::ostream& out, const BiasStrengthResult& r) {
  out << "p,preference\n";
  for (const auto& point : r.curve)
    out << json(point.p).dump() << ',' << json(point.mean_agree_f1 - point.mean_agree_f2).dump()
        << '\n';
}

inline json to_json(std::span<const DriftAlarm> alarms) {
  json out = json::array();
  for (const auto& a : alarms)
    out.push_back({{"batch_pair", {a.batch_pair_index, a.batch_pair_index + 1}},
                   {"agreement", a.agreement},
                   {"threshold", a.threshold},
                   {"fired", a.fired}});
  return out;
}

inline void write_csv(std::ostream& out, std::span<const DriftAlarm> alarms) {
  out << "pair,agreement,fired\n";
  for (const auto& a : alarms)
    out << a.batch_pair_index << ',' << json(a.agreement).dump() << ',' << (a.fired ? 1 : 0)
        << '\n';
}

}  // namespace stabilimeter::io
