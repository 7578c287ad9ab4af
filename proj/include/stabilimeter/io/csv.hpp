// Copyright 2026 The Stabilimeter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stabilimeter/core.hpp"

// Dataset files are CSV: a header of attribute names followed by a final
// `class` column, then one example per row with level and class names.
// A sidecar schema file declares one attribute per line as
// `name:level1,level2,...`, plus an optional `class:c1,c2,...` line.

namespace stabilimeter::io {

struct SchemaFile {
  AttributeSchema schema;
  std::optional<ClassSet> classes;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Splits one CSV record; double quotes group fields and "" escapes a quote.
inline std::vector<std::string> split_record(const std::string& line, const std::string& source,
                                             std::size_t line_number) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) throw ParseError(source, line_number, "unterminated quoted field");
  for (auto& f : fields) f = trim(f);
  return fields;
}

inline std::string quote_field(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline SchemaFile parse_schema(std::istream& in, const std::string& source = "schema") {
  std::vector<Attribute> attributes;
  std::optional<ClassSet> classes;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ParseError(source, line_number, "expected name:levels");
    const std::string name = detail::trim(std::string_view(text).substr(0, colon));
    auto levels = detail::split_list(std::string_view(text).substr(colon + 1));
    try {
      if (name == "class") {
        if (classes) throw ParseError(source, line_number, "duplicate class line");
        classes = ClassSet(std::move(levels));
      } else {
        for (const auto& l : levels)
          if (l.empty()) throw ParseError(source, line_number, "empty level name");
        // Validate the attribute on its own so errors keep the line number.
        AttributeSchema(std::vector<Attribute>{{name, levels}});
        attributes.push_back({name, std::move(levels)});
      }
    } catch (const InputError& e) {
      throw ParseError(source, line_number, e.what());
    }
  }
  try {
    return SchemaFile{AttributeSchema(std::move(attributes)), std::move(classes)};
  } catch (const InputError& e) {
    throw ParseError(source, 0, e.what());
  }
}

inline SchemaFile read_schema_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open schema file");
  return parse_schema(in, path.string());
}

inline void write_schema(std::ostream& out, const Domain& domain) {
  auto join = [](std::span<const std::string> items) {
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i) s += (i ? "," : "") + items[i];
    return s;
  };
  for (const auto& a : domain.schema.attributes()) out << a.name << ':' << join(a.levels) << '\n';
  out << "class:" << join(domain.classes.names()) << '\n';
}

/// Header and rows of a dataset file before levels are resolved.
struct RawTable {
  std::string source;
  std::vector<std::string> attribute_names;
  std::vector<std::vector<std::string>> rows;  // attribute values then class
  std::vector<std::size_t> line_numbers;
};

inline RawTable read_raw_table(std::istream& in, const std::string& source) {
  RawTable table;
  table.source = source;
  std::string line;
  std::size_t line_number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_record(line, source, line_number);
    if (!have_header) {
      if (fields.size() < 2 || fields.back() != "class")
        throw ParseError(source, line_number, "header must end with a 'class' column");
      fields.pop_back();
      table.attribute_names = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.attribute_names.size() + 1)
      throw ParseError(source, line_number,
                       "expected " + std::to_string(table.attribute_names.size() + 1) +
                           " fields, found " + std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_number);
  }
  if (!have_header) throw ParseError(source, 0, "missing header row");
  return table;
}

/// Domain for the tables: the declared schema when given (classes inferred if
/// it has no class line), otherwise levels and classes are the sorted
/// distinct values seen across all tables.
inline DomainPtr resolve_domain(std::span<const RawTable> tables,
                                const std::optional<SchemaFile>& declared) {
  if (tables.empty()) throw InputError("no tables to infer a domain from");
  const auto& names = tables.front().attribute_names;
  for (const auto& t : tables)
    if (t.attribute_names != names)
      throw ParseError(t.source, 1, "header differs from '" + tables.front().source + "'");

  auto sorted_values = [&](std::size_t column) {
    std::set<std::string> seen;
    for (const auto& t : tables)
      for (const auto& row : t.rows) seen.insert(row[column]);
    return std::vector<std::string>(seen.begin(), seen.end());
  };

  try {
    std::optional<AttributeSchema> schema;
    std::optional<ClassSet> classes;
    if (declared) {
      schema = declared->schema;
      classes = declared->classes;
      if (schema->size() != names.size())
        throw ParseError(tables.front().source, 1, "header does not match the declared schema");
      for (std::size_t i = 0; i < names.size(); ++i)
        if ((*schema)[i].name != names[i])
          throw ParseError(tables.front().source, 1,
                           "column '" + names[i] + "' does not match schema attribute '" +
                               (*schema)[i].name + "'");
    } else {
      std::vector<Attribute> attributes;
      for (std::size_t i = 0; i < names.size(); ++i) {
        auto levels = sorted_values(i);
        if (levels.size() < 2)
          throw ParseError(tables.front().source, 0,
                           "cannot infer levels of '" + names[i] +
                               "' from fewer than two distinct values; supply a schema file");
        attributes.push_back({names[i], std::move(levels)});
      }
      schema = AttributeSchema(std::move(attributes));
    }
    if (!classes) {
      auto values = sorted_values(names.size());
      if (values.size() < 2)
        throw ParseError(tables.front().source, 0,
                         "fewer than two distinct classes; declare them with a class: line");
      classes = ClassSet(std::move(values));
    }
    return make_domain(std::move(*schema), std::move(*classes));
  } catch (const InputError& e) {
    throw ParseError(tables.front().source, 0, e.what());
  }
}

inline Dataset to_dataset(const RawTable& table, const DomainPtr& domain) {
  std::vector<LabeledExample> examples;
  examples.reserve(table.rows.size());
  const auto& schema = domain->schema;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    LabeledExample e;
    e.vector.resize(schema.size());
    for (std::size_t a = 0; a < schema.size(); ++a) {
      const auto level = schema.level_index(a, row[a]);
      if (!level)
        throw ParseError(table.source, table.line_numbers[r],
                         "unknown level '" + row[a] + "' for attribute '" + schema[a].name + "'");
      e.vector[a] = *level;
    }
    const auto label = domain->classes.index_of(row.back());
    if (!label)
      throw ParseError(table.source, table.line_numbers[r], "unknown class '" + row.back() + "'");
    e.label = ClassLabel{*label};
    examples.push_back(std::move(e));
  }
  return Dataset(domain, std::move(examples));
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& data_path) {
  return std::filesystem::path(data_path.string() + ".schema");
}

inline RawTable read_raw_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open dataset file");
  return read_raw_table(in, path.string());
}

/// Reads a dataset file. Without an explicit schema, a sidecar named
/// `<path>.schema` is used when present; otherwise the schema is inferred.
inline Dataset parse_dataset(const std::filesystem::path& path,
                             std::optional<SchemaFile> schema = std::nullopt) {
  if (!schema && std::filesystem::exists(sidecar_path(path)))
    schema = read_schema_file(sidecar_path(path));
  const RawTable table = read_raw_file(path);
  const auto domain = resolve_domain(std::span(&table, 1), schema);
  return to_dataset(table, domain);
}

inline void write_dataset(std::ostream& out, const Dataset& data) {
  const auto& schema = data.schema();
  for (const auto& a : schema.attributes()) out << detail::quote_field(a.name) << ',';
  out << "class\n";
  for (const auto& e : data) {
    for (std::size_t a = 0; a < schema.size(); ++a)
      out << detail::quote_field(schema[a].levels[e.vector[a]]) << ',';
    out << detail::quote_field(data.classes().name(e.label.index)) << '\n';
  }
}

/// Writes the dataset and its sidecar schema next to it.
inline void write_dataset_file(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_dataset(out, data);
  std::ofstream schema(sidecar_path(path));
  if (!schema) throw InputError("cannot write " + sidecar_path(path).string());
  write_schema(schema, *data.domain());
}

}  // namespace stabilimeter::io
