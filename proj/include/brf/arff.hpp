#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "brf/dataset.hpp"
#include "brf/error.hpp"
#include "brf/text.hpp"

namespace brf {

struct ReadOptions {
  // Class attribute by name, or by 0-based position if no attribute has that
  // name. Empty selects the last attribute.
  std::string class_attribute;
  // Admit `?` in the class column (inputs to prediction).
  bool allow_unlabeled = false;
};

// Resolves a class column key against attribute names, see ReadOptions.
inline std::size_t resolve_column(const std::vector<std::string>& names, std::string_view key) {
  if (names.empty()) throw argument_error("no columns to select a class from");
  if (key.empty()) return names.size() - 1;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == key) return i;
  }
  std::size_t index = 0;
  const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), index);
  if (ec == std::errc() && ptr == key.data() + key.size() && index < names.size()) return index;
  throw argument_error("class column '" + std::string(key) + "' not found");
}

namespace detail {

inline std::string arff_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  out += '\'';
  return out;
}

// Splits a leading name token (quoted or bare) from the rest of the line.
inline std::pair<std::string, std::string_view> arff_take_name(std::string_view rest, std::size_t line) {
  rest = text::trim(rest);
  if (rest.empty()) throw parse_error("missing name", line);
  if (rest.front() == '\'' || rest.front() == '"') {
    const char q = rest.front();
    std::size_t i = 1;
    for (; i < rest.size(); ++i) {
      if (rest[i] == '\\') {
        ++i;
      } else if (rest[i] == q) {
        break;
      }
    }
    if (i >= rest.size()) throw parse_error("unterminated quoted name", line);
    return {text::unquote(rest.substr(0, i + 1)), rest.substr(i + 1)};
  }
  std::size_t end = 0;
  while (end < rest.size() && !std::isspace(static_cast<unsigned char>(rest[end])) && rest[end] != '{') ++end;
  return {std::string(rest.substr(0, end)), rest.substr(end)};
}

inline AttributeSpec arff_parse_attribute(std::string_view rest, std::size_t line) {
  auto [name, type] = arff_take_name(rest, line);
  type = text::trim(type);
  if (name.empty()) throw parse_error("attribute name must not be empty", line);
  if (type.empty()) throw parse_error("attribute '" + name + "' has no type", line);
  if (type.front() == '{') {
    const auto close = type.rfind('}');
    if (close == std::string_view::npos) throw parse_error("unterminated nominal domain for '" + name + "'", line);
    if (!text::trim(type.substr(close + 1)).empty()) {
      throw parse_error("unexpected text after nominal domain of '" + name + "'", line);
    }
    const auto body = type.substr(1, close - 1);
    const auto fields = text::split_quoted(body, ',');
    if (!fields) throw parse_error("unterminated quote in domain of '" + name + "'", line);
    std::vector<std::string> domain;
    for (auto f : *fields) {
      std::string label = text::unquote(f);
      if (label.empty()) {
        if (fields->size() == 1 && text::trim(f).empty()) break;  // `{}`
        throw parse_error("empty label in domain of '" + name + "'", line);
      }
      for (const auto& seen : domain) {
        if (seen == label) throw parse_error("duplicate label '" + label + "' in domain of '" + name + "'", line);
      }
      domain.push_back(std::move(label));
    }
    if (domain.empty()) throw parse_error("nominal attribute '" + name + "' has an empty domain", line);
    return AttributeSpec::nominal(std::move(name), std::move(domain));
  }
  const auto word = text::trim(type.substr(0, type.find_first_of(" \t")));
  if (text::iequals(word, "numeric") || text::iequals(word, "real") || text::iequals(word, "integer")) {
    return AttributeSpec::numeric(std::move(name));
  }
  if (text::iequals(word, "string") || text::iequals(word, "date") || text::iequals(word, "relational")) {
    throw unsupported_error("line " + std::to_string(line) + ": attribute '" + name + "' has unsupported type '" +
                            std::string(word) + "'");
  }
  throw parse_error("attribute '" + name + "' has unknown type '" + std::string(word) + "'", line);
}

}  // namespace detail

// Dense ARFF. `?` is missing, `%` starts a comment line, keywords are
// case-insensitive, names and labels may be quoted.
inline Dataset parse_arff(std::string_view content, const ReadOptions& options = {}) {
  const auto all_lines = text::lines(content);
  std::string relation;
  bool seen_relation = false;
  bool in_data = false;
  std::vector<AttributeSpec> attributes;
  std::size_t class_index = 0;
  std::vector<Instance> instances;

  for (std::size_t i = 0; i < all_lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto line = text::trim(all_lines[i]);
    if (line.empty() || line.front() == '%') continue;

    if (!in_data) {
      if (line.front() != '@') throw parse_error("expected a header declaration", line_no);
      if (text::istarts_with(line, "@relation")) {
        if (seen_relation) throw parse_error("duplicate @relation", line_no);
        const auto rest = text::trim(line.substr(9));
        if (rest.empty()) throw parse_error("@relation needs a name", line_no);
        relation = text::unquote(rest);
        seen_relation = true;
      } else if (text::istarts_with(line, "@attribute")) {
        if (!seen_relation) throw parse_error("@attribute before @relation", line_no);
        auto attr = detail::arff_parse_attribute(line.substr(10), line_no);
        for (const auto& existing : attributes) {
          if (existing.name == attr.name) throw parse_error("duplicate attribute '" + attr.name + "'", line_no);
        }
        attributes.push_back(std::move(attr));
      } else if (text::iequals(line, "@data")) {
        if (attributes.empty()) throw parse_error("@data before any @attribute", line_no);
        std::vector<std::string> names;
        for (const auto& a : attributes) names.push_back(a.name);
        try {
          class_index = resolve_column(names, options.class_attribute);
        } catch (const argument_error& e) {
          throw parse_error(e.what(), line_no);
        }
        if (!attributes[class_index].is_nominal()) {
          throw parse_error("class attribute '" + attributes[class_index].name + "' must be nominal", line_no);
        }
        in_data = true;
      } else {
        throw parse_error("unknown declaration '" + std::string(line.substr(0, line.find_first_of(" \t"))) + "'",
                          line_no);
      }
      continue;
    }

    if (line.front() == '{') {
      throw unsupported_error("line " + std::to_string(line_no) + ": sparse ARFF rows are not supported");
    }
    const auto fields = text::split_quoted(line, ',');
    if (!fields) throw parse_error("unterminated quote", line_no);
    if (fields->size() != attributes.size()) {
      throw parse_error("expected " + std::to_string(attributes.size()) + " values, found " +
                            std::to_string(fields->size()),
                        line_no);
    }
    Instance inst;
    inst.cells.reserve(attributes.size());
    for (std::size_t a = 0; a < attributes.size(); ++a) {
      const auto field = text::trim((*fields)[a]);
      const AttributeSpec& attr = attributes[a];
      if (field == "?") {
        if (a == class_index && !options.allow_unlabeled) throw parse_error("missing class value", line_no);
        inst.cells.push_back(Cell::missing());
        continue;
      }
      if (attr.is_nominal()) {
        const auto label = text::unquote(field);
        const auto idx = attr.index_of(label);
        if (!idx) throw parse_error("value '" + label + "' is not in the domain of '" + attr.name + "'", line_no);
        inst.cells.push_back(Cell::category(*idx));
      } else {
        const auto v = text::parse_real(field);
        if (!v) throw parse_error("'" + std::string(field) + "' is not a number (attribute '" + attr.name + "')", line_no);
        inst.cells.push_back(Cell::number(*v));
      }
    }
    instances.push_back(std::move(inst));
  }
  if (!seen_relation) throw parse_error("missing @relation");
  if (!in_data) throw parse_error("missing @data section");
  return Dataset(std::move(relation), std::move(attributes), class_index, std::move(instances), options.allow_unlabeled);
}

// Writes a dense ARFF document that parse_arff reads back to an equal
// Dataset (given the same class attribute).
inline std::string write_arff(const Dataset& d) {
  std::ostringstream out;
  out << "@relation " << detail::arff_quote(d.name()) << "\n\n";
  for (const auto& attr : d.attributes()) {
    out << "@attribute " << detail::arff_quote(attr.name) << ' ';
    if (attr.is_nominal()) {
      out << '{';
      for (std::size_t i = 0; i < attr.domain.size(); ++i) {
        if (i) out << ',';
        out << detail::arff_quote(attr.domain[i]);
      }
      out << '}';
    } else {
      out << "numeric";
    }
    out << '\n';
  }
  out << "\n@data\n";
  for (const auto& inst : d.instances()) {
    for (std::size_t a = 0; a < inst.cells.size(); ++a) {
      if (a) out << ',';
      const Cell& c = inst.cells[a];
      if (c.is_missing()) {
        out << '?';
      } else if (c.is_category()) {
        out << detail::arff_quote(d.attribute(a).domain[c.as_category()]);
      } else {
        out << text::format_real(c.as_number());
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace brf
