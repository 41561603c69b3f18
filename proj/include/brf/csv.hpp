#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "brf/arff.hpp"
#include "brf/dataset.hpp"
#include "brf/error.hpp"
#include "brf/text.hpp"

namespace brf {

// Comma-separated values with a header row. Empty fields and `?` are missing.
// A column is numeric when every non-missing value parses as a real number,
// otherwise nominal with its labels in first-appearance order.
inline Dataset parse_csv(std::string_view content, const ReadOptions& options = {}, std::string name = "csv") {
  const auto all_lines = text::lines(content);
  std::size_t first = 0;
  while (first < all_lines.size() && text::trim(all_lines[first]).empty()) ++first;
  if (first == all_lines.size()) throw parse_error("empty CSV document");

  const auto header = text::split_quoted(all_lines[first], ',');
  if (!header) throw parse_error("unterminated quote", first + 1);
  std::vector<std::string> names;
  for (auto h : *header) names.push_back(text::unquote(h));
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty()) throw parse_error("empty column name at position " + std::to_string(i), first + 1);
    for (std::size_t j = 0; j < i; ++j) {
      if (names[j] == names[i]) throw parse_error("duplicate column '" + names[i] + "'", first + 1);
    }
  }

  // Raw fields; nullopt = missing.
  std::vector<std::vector<std::optional<std::string>>> rows;
  for (std::size_t i = first + 1; i < all_lines.size(); ++i) {
    if (text::trim(all_lines[i]).empty()) continue;
    const auto fields = text::split_quoted(all_lines[i], ',');
    if (!fields) throw parse_error("unterminated quote", i + 1);
    if (fields->size() != names.size()) {
      throw parse_error("expected " + std::to_string(names.size()) + " fields, found " + std::to_string(fields->size()),
                        i + 1);
    }
    auto& row = rows.emplace_back();
    for (auto f : *fields) {
      const auto trimmed = text::trim(f);
      if (trimmed.empty() || trimmed == "?") {
        row.emplace_back();
      } else {
        row.emplace_back(text::unquote(trimmed));
      }
    }
  }

  const std::size_t class_index = resolve_column(names, options.class_attribute);

  std::vector<AttributeSpec> attributes;
  for (std::size_t c = 0; c < names.size(); ++c) {
    bool numeric = true;
    bool any = false;
    for (const auto& row : rows) {
      if (!row[c]) continue;
      any = true;
      if (!text::parse_real(*row[c])) {
        numeric = false;
        break;
      }
    }
    if (c == class_index) {
      if (!any) throw parse_error("class column '" + names[c] + "' has no values");
      if (numeric) throw parse_error("class column '" + names[c] + "' is numeric; the class must be nominal");
    }
    if (numeric) {
      attributes.push_back(AttributeSpec::numeric(names[c]));
    } else {
      std::vector<std::string> domain;
      std::unordered_map<std::string, std::size_t> seen;
      for (const auto& row : rows) {
        if (row[c] && seen.emplace(*row[c], domain.size()).second) domain.push_back(*row[c]);
      }
      attributes.push_back(AttributeSpec::nominal(names[c], std::move(domain)));
    }
  }

  std::vector<Instance> instances;
  instances.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Instance inst;
    inst.cells.reserve(names.size());
    for (std::size_t c = 0; c < names.size(); ++c) {
      const auto& field = rows[r][c];
      if (!field) {
        if (c == class_index && !options.allow_unlabeled) {
          throw parse_error("missing class value in data row " + std::to_string(r + 1));
        }
        inst.cells.push_back(Cell::missing());
      } else if (attributes[c].is_nominal()) {
        inst.cells.push_back(Cell::category(*attributes[c].index_of(*field)));
      } else {
        inst.cells.push_back(Cell::number(*text::parse_real(*field)));
      }
    }
    instances.push_back(std::move(inst));
  }
  return Dataset(std::move(name), std::move(attributes), class_index, std::move(instances), options.allow_unlabeled);
}

}  // namespace brf
