#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "brf/dataset.hpp"
#include "brf/error.hpp"
#include "brf/random.hpp"
#include "brf/sampling.hpp"
#include "brf/text.hpp"

namespace brf {

// Splits whose gain does not exceed this are treated as no gain at all.
// Gains differing by less than this compare equal for tie-breaking.
inline constexpr double kGainEpsilon = 1e-12;

// Shannon entropy in bits of a class-count vector. 0·log2(0) counts as 0.
inline double entropy(std::span<const std::size_t> counts) {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  if (n == 0) throw argument_error("entropy of an empty count vector");
  const double total = static_cast<double>(n);
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

namespace detail {

// H(parent) - sum_j (n_j / n) H(child_j), children in order, empty children skipped.
// Shared by information_gain and the split search so both produce identical bits.
template <typename ChildRange>
double gain_of(std::span<const std::size_t> parent, std::size_t n, const ChildRange& children) {
  double gain = entropy(parent);
  const double total = static_cast<double>(n);
  for (const auto& child : children) {
    std::size_t m = 0;
    for (auto c : child) m += c;
    if (m == 0) continue;
    gain -= (static_cast<double>(m) / total) * entropy(child);
  }
  return gain;
}

}  // namespace detail

// Entropy reduction of splitting `parent` into `children`. Children must
// partition the parent component-wise; empty children contribute nothing.
inline double information_gain(std::span<const std::size_t> parent,
                               std::span<const std::vector<std::size_t>> children) {
  std::size_t n = 0;
  for (auto c : parent) n += c;
  if (n == 0) throw argument_error("information gain of an empty parent");
  std::vector<std::size_t> sum(parent.size(), 0);
  for (const auto& child : children) {
    if (child.size() != parent.size()) throw argument_error("child count vector has the wrong number of classes");
    for (std::size_t c = 0; c < child.size(); ++c) sum[c] += child[c];
  }
  if (!std::equal(sum.begin(), sum.end(), parent.begin())) {
    throw argument_error("children do not partition the parent counts");
  }
  return std::max(0.0, detail::gain_of(parent, n, children));
}

// Fully imputed dataset in column-major doubles. Nominal values are stored
// as category indices. The class column is left empty.
class FeatureTable {
 public:
  FeatureTable() = default;

  explicit FeatureTable(const Dataset& d) : schema_(d.attributes().begin(), d.attributes().end()),
                                            class_index_(d.class_index()) {
    d.require_labeled();
    columns_.resize(d.num_attributes());
    for (std::size_t a = 0; a < d.num_attributes(); ++a) {
      if (a == class_index_) continue;
      auto& col = columns_[a];
      col.reserve(d.size());
      for (std::size_t r = 0; r < d.size(); ++r) {
        const Cell& c = d.instance(r).cells[a];
        if (c.is_missing()) {
          throw argument_error("attribute '" + schema_[a].name + "' has a missing value in row " + std::to_string(r) +
                               "; impute before growing trees");
        }
        col.push_back(c.raw());
      }
    }
    labels_.reserve(d.size());
    for (std::size_t r = 0; r < d.size(); ++r) labels_.push_back(d.class_of(r));
  }

  std::size_t num_rows() const noexcept { return labels_.size(); }
  std::size_t num_attributes() const noexcept { return schema_.size(); }
  std::size_t num_features() const noexcept { return schema_.size() - 1; }
  std::size_t num_classes() const { return schema_.at(class_index_).domain.size(); }
  std::size_t class_index() const noexcept { return class_index_; }
  const AttributeSpec& attribute(std::size_t a) const { return schema_.at(a); }
  std::span<const double> column(std::size_t a) const { return columns_.at(a); }
  double value(std::size_t a, std::size_t row) const { return columns_[a][row]; }
  std::span<const std::uint32_t> labels() const noexcept { return labels_; }
  std::uint32_t label(std::size_t row) const { return labels_[row]; }

 private:
  std::vector<AttributeSpec> schema_;
  std::size_t class_index_ = 0;
  std::vector<std::vector<double>> columns_;
  std::vector<std::uint32_t> labels_;
};

struct Split {
  enum class Kind { numeric, nominal };

  Kind kind = Kind::numeric;
  std::size_t attribute = 0;
  // Numeric only: rows with value <= threshold go left.
  double threshold = 0.0;
  double gain = 0.0;
};

// Threshold between two consecutive distinct values a < b.
inline double split_threshold(double a, double b) {
  const double t = std::midpoint(a, b);
  return t < b ? t : a;
}

// Highest-gain split over `candidates` for the given rows (duplicates allowed).
// Numeric attributes are cut at midpoints between consecutive distinct
// values; nominal attributes split one way per category. Ties go to the lower
// attribute index, then the lower threshold. Every numeric side, and at least
// two nominal branches, must hold `min_leaf` rows. Returns nullopt when no
// split has positive gain.
inline std::optional<Split> best_split(const FeatureTable& table, std::span<const std::size_t> rows,
                                       std::span<const std::size_t> candidates, std::size_t min_leaf = 1) {
  if (rows.empty() || candidates.empty()) return std::nullopt;
  const std::size_t k = table.num_classes();
  const std::size_t n = rows.size();
  std::vector<std::size_t> parent(k, 0);
  for (auto r : rows) ++parent[table.label(r)];
  if (std::count(parent.begin(), parent.end(), std::size_t{0}) >= static_cast<std::ptrdiff_t>(k) - 1) {
    return std::nullopt;  // pure
  }

  std::vector<std::size_t> order(candidates.begin(), candidates.end());
  std::sort(order.begin(), order.end());

  std::optional<Split> best;
  double best_gain = kGainEpsilon;
  std::vector<std::pair<double, std::uint32_t>> sorted;
  std::vector<std::vector<std::size_t>> sides(2, std::vector<std::size_t>(k, 0));

  for (auto a : order) {
    if (a == table.class_index() || a >= table.num_attributes()) continue;
    const AttributeSpec& attr = table.attribute(a);
    const auto column = table.column(a);
    if (attr.is_nominal()) {
      const std::size_t m = attr.domain.size();
      std::vector<std::vector<std::size_t>> branches(m, std::vector<std::size_t>(k, 0));
      std::vector<std::size_t> sizes(m, 0);
      for (auto r : rows) {
        const auto cat = static_cast<std::size_t>(column[r]);
        ++branches[cat][table.label(r)];
        ++sizes[cat];
      }
      const auto big_enough =
          std::count_if(sizes.begin(), sizes.end(), [&](std::size_t s) { return s >= min_leaf && s > 0; });
      if (big_enough < 2) continue;
      const double gain = detail::gain_of(parent, n, branches);
      if (gain > best_gain + (best ? kGainEpsilon : 0.0)) {
        best = Split{Split::Kind::nominal, a, 0.0, gain};
        best_gain = gain;
      }
      continue;
    }

    sorted.clear();
    for (auto r : rows) sorted.emplace_back(column[r], table.label(r));
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    auto& left = sides[0];
    auto& right = sides[1];
    std::fill(left.begin(), left.end(), 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ++left[sorted[i].second];
      if (!(sorted[i].first < sorted[i + 1].first)) continue;
      const std::size_t n_left = i + 1;
      if (n_left < min_leaf || n - n_left < min_leaf) continue;
      for (std::size_t c = 0; c < k; ++c) right[c] = parent[c] - left[c];
      const double gain = detail::gain_of(parent, n, sides);
      if (gain > best_gain + (best ? kGainEpsilon : 0.0)) {
        best = Split{Split::Kind::numeric, a, split_threshold(sorted[i].first, sorted[i + 1].first), gain};
        best_gain = gain;
      }
    }
  }
  return best;
}

struct TreeParams {
  // Candidate features drawn at each node.
  std::size_t mtry = 1;
  // Minimum rows on each side of a split.
  std::size_t min_leaf = 1;
  // Seed of the stream the tree was grown from (recorded for reproduction).
  std::uint64_t seed = 0;

  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

// floor(log2(F)) + 1 for F non-class attributes.
inline std::size_t default_mtry(std::size_t num_features) {
  if (num_features == 0) throw argument_error("no features to choose from");
  return static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(num_features)))) + 1;
}

struct Leaf {
  std::vector<std::size_t> class_counts;
  friend bool operator==(const Leaf&, const Leaf&) = default;
};

struct NumericSplit {
  std::size_t attribute = 0;
  double threshold = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;
  friend bool operator==(const NumericSplit&, const NumericSplit&) = default;
};

struct NominalSplit {
  std::size_t attribute = 0;
  // One child per category of the attribute.
  std::vector<std::size_t> children;
  friend bool operator==(const NominalSplit&, const NominalSplit&) = default;
};

using Node = std::variant<Leaf, NumericSplit, NominalSplit>;

// Index of the largest count; ties go to the lowest class index.
template <typename T>
std::size_t argmax_lowest(std::span<const T> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

// Nodes live in a flat arena; children refer to arena positions. Node 0 is
// the root.
class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<Node> nodes, TreeParams params, std::size_t class_count)
      : nodes_(std::move(nodes)), params_(params), class_count_(class_count) {
    if (nodes_.empty()) throw argument_error("a tree needs at least one node");
  }

  std::span<const Node> nodes() const noexcept { return nodes_; }
  const Node& root() const { return nodes_.at(0); }
  const TreeParams& params() const noexcept { return params_; }
  std::size_t class_count() const noexcept { return class_count_; }

  // Leaf reached by a fully observed row indexed by attribute position.
  const Leaf& route(std::span<const double> row) const {
    std::size_t at = 0;
    for (;;) {
      const Node& node = nodes_.at(at);
      if (const auto* leaf = std::get_if<Leaf>(&node)) return *leaf;
      if (const auto* num = std::get_if<NumericSplit>(&node)) {
        at = row[num->attribute] <= num->threshold ? num->left : num->right;
      } else {
        const auto& nom = std::get<NominalSplit>(node);
        const double v = row[nom.attribute];
        if (!(v >= 0.0) || static_cast<std::size_t>(v) >= nom.children.size()) {
          throw schema_error("category index " + text::format_real(v) + " is outside the trained domain of attribute " +
                             std::to_string(nom.attribute));
        }
        at = nom.children[static_cast<std::size_t>(v)];
      }
    }
  }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return std::holds_alternative<Leaf>(n); }));
  }

  std::size_t depth() const { return depth_from(0); }

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::size_t depth_from(std::size_t at) const {
    const Node& node = nodes_[at];
    if (std::holds_alternative<Leaf>(node)) return 0;
    std::size_t d = 0;
    if (const auto* num = std::get_if<NumericSplit>(&node)) {
      d = std::max(depth_from(num->left), depth_from(num->right));
    } else {
      for (auto c : std::get<NominalSplit>(node).children) d = std::max(d, depth_from(c));
    }
    return d + 1;
  }

  std::vector<Node> nodes_;
  TreeParams params_;
  std::size_t class_count_ = 0;
};

namespace detail {

class TreeGrower {
 public:
  TreeGrower(const FeatureTable& table, const TreeParams& params, RandomSource& rng)
      : table_(table), params_(params), rng_(rng), exhausted_(table.num_attributes(), false) {}

  std::vector<Node> grow(std::vector<std::size_t> rows) {
    build(std::move(rows));
    return std::move(nodes_);
  }

 private:
  std::vector<std::size_t> counts_of(std::span<const std::size_t> rows) const {
    std::vector<std::size_t> counts(table_.num_classes(), 0);
    for (auto r : rows) ++counts[table_.label(r)];
    return counts;
  }

  std::size_t make_leaf(std::vector<std::size_t> counts) {
    nodes_.emplace_back(Leaf{std::move(counts)});
    return nodes_.size() - 1;
  }

  std::size_t build(std::vector<std::size_t> rows) {
    auto counts = counts_of(rows);
    const auto non_zero = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
    if (non_zero <= 1 || rows.size() < 2 * params_.min_leaf) return make_leaf(std::move(counts));

    std::vector<std::size_t> eligible;
    for (std::size_t a = 0; a < table_.num_attributes(); ++a) {
      if (a != table_.class_index() && !exhausted_[a]) eligible.push_back(a);
    }
    if (eligible.empty()) return make_leaf(std::move(counts));
    // Partial Fisher-Yates: the first `draw` entries become the candidates.
    const std::size_t draw = std::min(params_.mtry, eligible.size());
    for (std::size_t i = 0; i < draw; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_.below(eligible.size() - i));
      std::swap(eligible[i], eligible[j]);
    }
    const auto candidates = std::span<const std::size_t>(eligible).first(draw);
    const auto split = best_split(table_, rows, candidates, params_.min_leaf);
    if (!split) return make_leaf(std::move(counts));

    const std::size_t self = nodes_.size();
    nodes_.emplace_back(Leaf{});  // placeholder until children exist
    const auto column = table_.column(split->attribute);

    if (split->kind == Split::Kind::numeric) {
      std::vector<std::size_t> left, right;
      for (auto r : rows) (column[r] <= split->threshold ? left : right).push_back(r);
      rows = {};
      const std::size_t l = build(std::move(left));
      const std::size_t rr = build(std::move(right));
      nodes_[self] = NumericSplit{split->attribute, split->threshold, l, rr};
    } else {
      const std::size_t m = table_.attribute(split->attribute).domain.size();
      std::vector<std::vector<std::size_t>> parts(m);
      for (auto r : rows) parts[static_cast<std::size_t>(column[r])].push_back(r);
      rows = {};
      exhausted_[split->attribute] = true;
      std::vector<std::size_t> children;
      children.reserve(m);
      for (auto& part : parts) {
        // An empty branch predicts from the parent's class counts.
        children.push_back(part.empty() ? make_leaf(counts) : build(std::move(part)));
      }
      exhausted_[split->attribute] = false;
      nodes_[self] = NominalSplit{split->attribute, std::move(children)};
    }
    return self;
  }

  const FeatureTable& table_;
  TreeParams params_;
  RandomSource& rng_;
  std::vector<bool> exhausted_;
  std::vector<Node> nodes_;
};

}  // namespace detail

// Grows one unpruned tree on the sampled rows of an imputed table.
inline DecisionTree grow_tree(const FeatureTable& table, const IndexSample& sample, const TreeParams& params,
                              RandomSource& rng) {
  if (sample.indices.empty()) throw argument_error("cannot grow a tree from an empty sample");
  if (params.mtry < 1 || params.mtry > table.num_features()) {
    throw argument_error("mtry must lie in [1, " + std::to_string(table.num_features()) + "]");
  }
  if (params.min_leaf < 1) throw argument_error("min_leaf must be at least 1");
  for (auto r : sample.indices) {
    if (r >= table.num_rows()) throw argument_error("sample index out of range");
  }
  detail::TreeGrower grower(table, params, rng);
  return DecisionTree(grower.grow(sample.indices), params, table.num_classes());
}

inline DecisionTree grow_tree(const Dataset& imputed, const IndexSample& sample, const TreeParams& params,
                              RandomSource& rng) {
  return grow_tree(FeatureTable(imputed), sample, params, rng);
}

// Attribute-indexed row of doubles for routing. Missing cells are rejected.
inline std::vector<double> to_row(const Instance& x, std::size_t class_index) {
  std::vector<double> row(x.cells.size(), 0.0);
  for (std::size_t a = 0; a < x.cells.size(); ++a) {
    if (a == class_index) continue;
    if (x.cells[a].is_missing()) throw argument_error("instance has a missing value at attribute " + std::to_string(a));
    row[a] = x.cells[a].raw();
  }
  return row;
}

// Class proportions at the leaf reached by `row`.
inline std::vector<double> predict_tree(const DecisionTree& tree, std::span<const double> row) {
  const auto& counts = tree.route(row).class_counts;
  std::size_t n = 0;
  for (auto c : counts) n += c;
  std::vector<double> p(counts.size(), 0.0);
  for (std::size_t c = 0; c < counts.size(); ++c) p[c] = static_cast<double>(counts[c]) / static_cast<double>(n);
  return p;
}

inline std::vector<double> predict_tree(const DecisionTree& tree, const Instance& x, std::size_t class_index) {
  return predict_tree(tree, to_row(x, class_index));
}

inline std::size_t hard_prediction(std::span<const double> proportions) { return argmax_lowest(proportions); }

// Indented text dump, one node per line.
inline std::string describe(const DecisionTree& tree) {
  std::ostringstream out;
  auto visit = [&](auto&& self, std::size_t at, int depth) -> void {
    out << std::string(static_cast<std::size_t>(depth) * 2, ' ');
    const Node& node = tree.nodes()[at];
    if (const auto* leaf = std::get_if<Leaf>(&node)) {
      out << "leaf";
      for (auto c : leaf->class_counts) out << ' ' << c;
      out << '\n';
    } else if (const auto* num = std::get_if<NumericSplit>(&node)) {
      out << "num a" << num->attribute << " <= " << text::format_real(num->threshold) << '\n';
      self(self, num->left, depth + 1);
      self(self, num->right, depth + 1);
    } else {
      const auto& nom = std::get<NominalSplit>(node);
      out << "nom a" << nom.attribute << '\n';
      for (auto c : nom.children) self(self, c, depth + 1);
    }
  };
  visit(visit, 0, 0);
  return out.str();
}

}  // namespace brf
