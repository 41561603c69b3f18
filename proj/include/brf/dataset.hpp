#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "brf/error.hpp"

namespace brf {

enum class AttributeKind { numeric, nominal };

struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::numeric;
  // Category labels in declaration order. Empty for numeric attributes.
  std::vector<std::string> domain;

  static AttributeSpec numeric(std::string name) { return {std::move(name), AttributeKind::numeric, {}}; }
  static AttributeSpec nominal(std::string name, std::vector<std::string> domain) {
    return {std::move(name), AttributeKind::nominal, std::move(domain)};
  }

  bool is_nominal() const noexcept { return kind == AttributeKind::nominal; }

  std::optional<std::uint32_t> index_of(std::string_view label) const {
    for (std::size_t i = 0; i < domain.size(); ++i) {
      if (domain[i] == label) return static_cast<std::uint32_t>(i);
    }
    return std::nullopt;
  }

  friend bool operator==(const AttributeSpec&, const AttributeSpec&) = default;
};

inline std::string_view to_string(AttributeKind kind) {
  return kind == AttributeKind::numeric ? "numeric" : "nominal";
}

// One value of an instance: a real number, a category index, or missing.
class Cell {
 public:
  enum class Kind : std::uint8_t { missing, number, category };

  Cell() = default;

  static Cell number(double v) { return Cell(Kind::number, v); }
  static Cell category(std::uint32_t index) { return Cell(Kind::category, static_cast<double>(index)); }
  static Cell missing() { return Cell(); }

  Kind kind() const noexcept { return kind_; }
  bool is_missing() const noexcept { return kind_ == Kind::missing; }
  bool is_number() const noexcept { return kind_ == Kind::number; }
  bool is_category() const noexcept { return kind_ == Kind::category; }

  double as_number() const {
    if (kind_ != Kind::number) throw argument_error("cell does not hold a number");
    return value_;
  }
  std::uint32_t as_category() const {
    if (kind_ != Kind::category) throw argument_error("cell does not hold a category");
    return static_cast<std::uint32_t>(value_);
  }
  // Number, or category index as a real. Only valid when not missing.
  double raw() const noexcept { return value_; }

  friend bool operator==(const Cell& a, const Cell& b) noexcept {
    if (a.kind_ != b.kind_) return false;
    return a.kind_ == Kind::missing || a.value_ == b.value_;
  }

 private:
  Cell(Kind kind, double value) : kind_(kind), value_(value) {}

  Kind kind_ = Kind::missing;
  double value_ = 0.0;
};

struct Instance {
  std::vector<Cell> cells;

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct ClassDistribution {
  std::vector<std::size_t> counts;
  std::size_t total = 0;

  // Smallest class; ties go to the later class so the earlier one stays the majority.
  std::size_t minority_index() const {
    std::size_t best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c) {
      if (counts[c] <= counts[best]) best = c;
    }
    return best;
  }
  std::size_t minority_count() const { return counts.at(minority_index()); }
  double minority_fraction() const {
    return total == 0 ? 0.0 : static_cast<double>(minority_count()) / static_cast<double>(total);
  }
};

// Attribute schema, instances and the designated class attribute.
// Validated on construction and immutable afterwards.
class Dataset {
 public:
  Dataset() = default;

  // Throws argument_error if any invariant fails. `allow_unlabeled` admits
  // missing class cells (prediction inputs); training and evaluation reject
  // such datasets via require_labeled().
  Dataset(std::string name, std::vector<AttributeSpec> attributes, std::size_t class_index,
          std::vector<Instance> instances, bool allow_unlabeled = false)
      : name_(std::move(name)),
        attributes_(std::move(attributes)),
        class_index_(class_index),
        instances_(std::move(instances)) {
    validate_schema(attributes_, class_index_);
    labeled_ = true;
    for (std::size_t row = 0; row < instances_.size(); ++row) {
      const auto& cells = instances_[row].cells;
      if (cells.size() != attributes_.size()) {
        throw argument_error("instance " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                             " cells, expected " + std::to_string(attributes_.size()));
      }
      for (std::size_t a = 0; a < cells.size(); ++a) {
        const Cell& cell = cells[a];
        const AttributeSpec& attr = attributes_[a];
        if (cell.is_missing()) {
          if (a == class_index_) {
            if (!allow_unlabeled) throw argument_error("instance " + std::to_string(row) + " has a missing class value");
            labeled_ = false;
          }
          continue;
        }
        if (attr.is_nominal()) {
          if (!cell.is_category() || cell.as_category() >= attr.domain.size()) {
            throw argument_error("instance " + std::to_string(row) + ": invalid value for nominal attribute '" +
                                 attr.name + "'");
          }
        } else if (!cell.is_number()) {
          throw argument_error("instance " + std::to_string(row) + ": numeric attribute '" + attr.name +
                               "' holds a category");
        }
      }
    }
  }

  static void validate_schema(std::span<const AttributeSpec> attributes, std::size_t class_index) {
    if (attributes.empty()) throw argument_error("dataset has no attributes");
    for (const auto& attr : attributes) {
      if (attr.name.empty()) throw argument_error("attribute name must not be empty");
      if (attr.is_nominal()) {
        if (attr.domain.empty()) throw argument_error("nominal attribute '" + attr.name + "' has an empty domain");
        std::unordered_set<std::string> seen;
        for (const auto& label : attr.domain) {
          if (!seen.insert(label).second) {
            throw argument_error("nominal attribute '" + attr.name + "' declares '" + label + "' twice");
          }
        }
      } else if (!attr.domain.empty()) {
        throw argument_error("numeric attribute '" + attr.name + "' must not have a domain");
      }
    }
    if (class_index >= attributes.size()) throw argument_error("class index out of range");
    if (!attributes[class_index].is_nominal()) {
      throw argument_error("class attribute '" + attributes[class_index].name + "' must be nominal");
    }
  }

  const std::string& name() const noexcept { return name_; }
  std::span<const AttributeSpec> attributes() const noexcept { return attributes_; }
  const AttributeSpec& attribute(std::size_t i) const { return attributes_.at(i); }
  std::size_t num_attributes() const noexcept { return attributes_.size(); }
  // Attribute count without the class.
  std::size_t num_features() const noexcept { return attributes_.size() - 1; }
  std::size_t class_index() const noexcept { return class_index_; }
  const AttributeSpec& class_attribute() const { return attributes_.at(class_index_); }
  std::size_t num_classes() const { return class_attribute().domain.size(); }

  std::span<const Instance> instances() const noexcept { return instances_; }
  const Instance& instance(std::size_t i) const { return instances_.at(i); }
  std::size_t size() const noexcept { return instances_.size(); }
  bool empty() const noexcept { return instances_.empty(); }
  bool labeled() const noexcept { return labeled_; }

  std::uint32_t class_of(std::size_t row) const { return instances_.at(row).cells[class_index_].as_category(); }

  void require_labeled() const {
    if (!labeled_) throw argument_error("dataset '" + name_ + "' has instances without a class value");
  }

  // New dataset holding the given rows, in the given order.
  Dataset subset(std::span<const std::size_t> rows) const {
    std::vector<Instance> picked;
    picked.reserve(rows.size());
    for (auto r : rows) picked.push_back(instances_.at(r));
    return Dataset(name_, attributes_, class_index_, std::move(picked), !labeled_);
  }

  Dataset with_instances(std::vector<Instance> instances) const {
    return Dataset(name_, attributes_, class_index_, std::move(instances), !labeled_);
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::string name_;
  std::vector<AttributeSpec> attributes_;
  std::size_t class_index_ = 0;
  std::vector<Instance> instances_;
  bool labeled_ = true;
};

inline ClassDistribution class_distribution(const Dataset& d) {
  d.require_labeled();
  ClassDistribution dist;
  dist.counts.assign(d.num_classes(), 0);
  for (std::size_t row = 0; row < d.size(); ++row) ++dist.counts[d.class_of(row)];
  dist.total = d.size();
  return dist;
}

// --- imputation -------------------------------------------------------------

// Fill value per attribute. Empty for the class attribute.
struct ImputationStats {
  std::vector<std::optional<Cell>> fill;

  friend bool operator==(const ImputationStats&, const ImputationStats&) = default;
};

enum class EmptyColumnPolicy {
  // A column with no observed value is an error.
  reject,
  // Such a column is filled with 0 (numeric) or category 0 (nominal). It is
  // then constant, so no split ever selects it.
  fill_constant,
};

inline ImputationStats compute_imputation(const Dataset& d, EmptyColumnPolicy policy = EmptyColumnPolicy::reject) {
  ImputationStats stats;
  stats.fill.resize(d.num_attributes());
  for (std::size_t a = 0; a < d.num_attributes(); ++a) {
    if (a == d.class_index()) continue;
    const AttributeSpec& attr = d.attribute(a);
    std::size_t observed = 0;
    if (attr.is_nominal()) {
      std::vector<std::size_t> freq(attr.domain.size(), 0);
      for (const auto& inst : d.instances()) {
        const Cell& c = inst.cells[a];
        if (!c.is_missing()) {
          ++freq[c.as_category()];
          ++observed;
        }
      }
      // max_element returns the first maximum: ties go to the smallest index.
      const auto mode = static_cast<std::uint32_t>(std::max_element(freq.begin(), freq.end()) - freq.begin());
      stats.fill[a] = Cell::category(mode);
    } else {
      double sum = 0.0;
      for (const auto& inst : d.instances()) {
        const Cell& c = inst.cells[a];
        if (!c.is_missing()) {
          sum += c.as_number();
          ++observed;
        }
      }
      stats.fill[a] = Cell::number(observed == 0 ? 0.0 : sum / static_cast<double>(observed));
    }
    if (observed == 0) {
      bool has_missing = !d.empty();
      if (policy == EmptyColumnPolicy::reject && has_missing) {
        throw imputation_error("attribute '" + attr.name + "' has no observed values to impute from");
      }
    }
  }
  return stats;
}

// Replaces missing non-class cells with the recorded fill values.
inline Instance apply_imputation(const Instance& x, const ImputationStats& stats, std::size_t class_index) {
  Instance out = x;
  for (std::size_t a = 0; a < out.cells.size() && a < stats.fill.size(); ++a) {
    if (a == class_index || !out.cells[a].is_missing()) continue;
    if (stats.fill[a]) out.cells[a] = *stats.fill[a];
  }
  return out;
}

inline Dataset apply_imputation(const Dataset& d, const ImputationStats& stats) {
  if (stats.fill.size() != d.num_attributes()) throw argument_error("imputation statistics do not match dataset");
  std::vector<Instance> filled;
  filled.reserve(d.size());
  for (const auto& inst : d.instances()) filled.push_back(apply_imputation(inst, stats, d.class_index()));
  return d.with_instances(std::move(filled));
}

// Mean for numeric columns, mode for nominal ones (ties to the smallest
// category index). Throws imputation_error for a column with no observed value.
inline Dataset impute_mean_mode(const Dataset& d) { return apply_imputation(d, compute_imputation(d)); }

inline bool has_missing_features(const Dataset& d) {
  for (const auto& inst : d.instances()) {
    for (std::size_t a = 0; a < inst.cells.size(); ++a) {
      if (a != d.class_index() && inst.cells[a].is_missing()) return true;
    }
  }
  return false;
}

}  // namespace brf
