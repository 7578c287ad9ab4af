// Copyright 2026 The Stabilimeter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cctype>
#include <charconv>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "stabilimeter/core.hpp"

namespace stabilimeter {

/// Propositional formula over boolean attributes. Text form is a prefix
/// s-expression: `true`, `false`, `(var i)`, `(not f)`, `(and f g ...)`,
/// `(or f g ...)`.
class BooleanFormula {
 public:
  enum class Op { constant, variable, negation, conjunction, disjunction };

  static BooleanFormula constant(bool value) {
    return BooleanFormula(std::make_shared<const Node>(Node{Op::constant, value, 0, {}}));
  }
  static BooleanFormula variable(std::size_t index) {
    return BooleanFormula(std::make_shared<const Node>(Node{Op::variable, false, index, {}}));
  }
  static BooleanFormula negation(BooleanFormula operand) {
    return BooleanFormula(
        std::make_shared<const Node>(Node{Op::negation, false, 0, {std::move(operand)}}));
  }
  static BooleanFormula conjunction(std::vector<BooleanFormula> operands) {
    return nary(Op::conjunction, std::move(operands));
  }
  static BooleanFormula disjunction(std::vector<BooleanFormula> operands) {
    return nary(Op::disjunction, std::move(operands));
  }

  Op op() const noexcept { return node_->op; }
  bool value() const noexcept { return node_->value; }
  std::size_t index() const noexcept { return node_->index; }
  const std::vector<BooleanFormula>& operands() const noexcept { return node_->operands; }

  /// Vectors hold levels 0/1; level 1 means true.
  bool evaluate(std::span<const Level> vector) const {
    switch (node_->op) {
      case Op::constant: return node_->value;
      case Op::variable: return vector[node_->index] != 0;
      case Op::negation: return !node_->operands[0].evaluate(vector);
      case Op::conjunction:
        for (const auto& f : node_->operands)
          if (!f.evaluate(vector)) return false;
        return true;
      case Op::disjunction:
        for (const auto& f : node_->operands)
          if (f.evaluate(vector)) return true;
        return false;
    }
    return false;
  }

  /// One more than the largest variable index, 0 for closed formulas.
  std::size_t variable_count() const {
    switch (node_->op) {
      case Op::constant: return 0;
      case Op::variable: return node_->index + 1;
      default: {
        std::size_t n = 0;
        for (const auto& f : node_->operands) n = std::max(n, f.variable_count());
        return n;
      }
    }
  }

  std::string to_string() const {
    switch (node_->op) {
      case Op::constant: return node_->value ? "true" : "false";
      case Op::variable: return "(var " + std::to_string(node_->index) + ")";
      default: break;
    }
    std::string out = node_->op == Op::negation      ? "(not"
                      : node_->op == Op::conjunction ? "(and"
                                                     : "(or";
    for (const auto& f : node_->operands) out += " " + f.to_string();
    return out + ")";
  }

  static BooleanFormula parse(std::string_view text) {
    Parser parser{text, 0};
    BooleanFormula f = parser.expression();
    parser.skip_space();
    if (parser.pos != text.size()) parser.fail("trailing input");
    return f;
  }

  /// Structural equality.
  friend bool operator==(const BooleanFormula& a, const BooleanFormula& b) {
    if (a.node_ == b.node_) return true;
    return a.node_->op == b.node_->op && a.node_->value == b.node_->value &&
           a.node_->index == b.node_->index && a.node_->operands == b.node_->operands;
  }

 private:
  struct Node {
    Op op;
    bool value;
    std::size_t index;
    std::vector<BooleanFormula> operands;
  };

  explicit BooleanFormula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  static BooleanFormula nary(Op op, std::vector<BooleanFormula> operands) {
    if (operands.size() < 2) throw InputError("and/or need at least two operands");
    return BooleanFormula(std::make_shared<const Node>(Node{op, false, 0, std::move(operands)}));
  }

  struct Parser {
    std::string_view text;
    std::size_t pos;

    [[noreturn]] void fail(const std::string& what) const {
      throw ParseError("formula", 0, what + " at offset " + std::to_string(pos));
    }

    void skip_space() {
      while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    std::string_view atom() {
      skip_space();
      const std::size_t start = pos;
      while (pos < text.size() && text[pos] != '(' && text[pos] != ')' &&
             !std::isspace(static_cast<unsigned char>(text[pos])))
        ++pos;
      if (start == pos) fail("expected a symbol");
      return text.substr(start, pos - start);
    }

    void expect(char c) {
      skip_space();
      if (pos >= text.size() || text[pos] != c) fail(std::string("expected '") + c + "'");
      ++pos;
    }

    BooleanFormula expression() {
      skip_space();
      if (pos >= text.size()) fail("unexpected end of input");
      if (text[pos] != '(') {
        const auto word = atom();
        if (word == "true") return constant(true);
        if (word == "false") return constant(false);
        fail("unknown symbol '" + std::string(word) + "'");
      }
      ++pos;
      const auto head = atom();
      BooleanFormula result = constant(false);
      if (head == "var") {
        const auto digits = atom();
        std::size_t index = 0;
        const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
        if (ec != std::errc() || end != digits.data() + digits.size())
          fail("bad variable index '" + std::string(digits) + "'");
        result = variable(index);
      } else if (head == "not") {
        result = negation(expression());
      } else if (head == "and" || head == "or") {
        std::vector<BooleanFormula> operands;
        for (;;) {
          skip_space();
          if (pos < text.size() && text[pos] == ')') break;
          operands.push_back(expression());
        }
        if (operands.size() < 2) fail("'" + std::string(head) + "' needs at least two operands");
        result = head == "and" ? conjunction(std::move(operands)) : disjunction(std::move(operands));
      } else {
        fail("unknown operator '" + std::string(head) + "'");
      }
      expect(')');
      return result;
    }
  };

  std::shared_ptr<const Node> node_;
};

/// Formula viewed as a concept over a boolean domain: class 1 iff true.
class FormulaConcept final : public ConceptModel {
 public:
  explicit FormulaConcept(BooleanFormula formula) : formula_(std::move(formula)) {}
  ClassLabel classify(std::span<const Level> v) const override {
    return ClassLabel{formula_.evaluate(v) ? 1u : 0u};
  }
  ConceptKind kind() const noexcept override { return ConceptKind::formula; }
  const BooleanFormula& formula() const noexcept { return formula_; }

 private:
  BooleanFormula formula_;
};

/// Concept over `attributes` boolean attributes. The domain must be wide
/// enough for every variable in the formula.
inline Concept formula_concept(const BooleanFormula& formula, DomainPtr domain) {
  const auto& d = *domain;
  if (d.classes.size() != 2) throw InputError("formula concepts need a binary class set");
  if (formula.variable_count() > d.schema.size())
    throw InputError("formula references an attribute outside the schema");
  for (const auto& a : d.schema.attributes())
    if (a.cardinality() != 2) throw InputError("formula concepts need boolean attributes");
  return Concept::make<FormulaConcept>(std::move(domain), formula);
}

inline Concept formula_concept(const BooleanFormula& formula, std::size_t attributes) {
  return formula_concept(formula, boolean_domain(attributes));
}

}  // namespace stabilimeter
