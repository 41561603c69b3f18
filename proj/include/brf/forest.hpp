#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brf/dataset.hpp"
#include "brf/error.hpp"
#include "brf/parallel.hpp"
#include "brf/random.hpp"
#include "brf/sampling.hpp"
#include "brf/tree.hpp"

namespace brf {

struct ForestParams {
  std::size_t num_trees = 100;
  // Per-class bootstrap. Without explicit sample_size every class draws the
  // minority-class count of the training data.
  bool balanced = false;
  // Explicit per-class sizes. Setting this implies balanced.
  std::optional<SampleSize> sample_size;
  // Candidate features per node; defaults to floor(log2(F)) + 1.
  std::optional<std::size_t> mtry;
  std::size_t min_leaf = 1;
  std::uint64_t master_seed = 1;

  bool is_balanced() const noexcept { return balanced || sample_size.has_value(); }

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  // As trained: mtry always set; sample_size set iff balanced.
  ForestParams params;
  std::string relation;
  std::vector<AttributeSpec> schema;
  std::size_t class_index = 0;
  // Rows of the training data that tree i never drew, ascending.
  std::vector<std::vector<std::size_t>> oob_indices;
  ImputationStats imputation;
  std::size_t training_size = 0;

  std::size_t num_classes() const { return schema.at(class_index).domain.size(); }
  const AttributeSpec& class_attribute() const { return schema.at(class_index); }

  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

// Checks a schema against the model's. The error names the first attribute
// that differs.
inline void check_schema(const ForestModel& m, std::span<const AttributeSpec> attributes, std::size_t class_index) {
  for (std::size_t a = 0; a < std::max(m.schema.size(), attributes.size()); ++a) {
    if (a >= m.schema.size()) throw schema_error("unexpected extra attribute '" + attributes[a].name + "'");
    const AttributeSpec& want = m.schema[a];
    if (a >= attributes.size()) throw schema_error("attribute '" + want.name + "' is missing");
    const AttributeSpec& got = attributes[a];
    if (got.name != want.name) {
      throw schema_error("attribute " + std::to_string(a) + " is '" + got.name + "', model expects '" + want.name + "'");
    }
    if (got.kind != want.kind) {
      throw schema_error("attribute '" + want.name + "' is " + std::string(to_string(got.kind)) + ", model expects " +
                         std::string(to_string(want.kind)));
    }
    if (got.domain != want.domain) throw schema_error("attribute '" + want.name + "' has a different nominal domain");
  }
  if (class_index != m.class_index) {
    throw schema_error("class attribute is '" + attributes[class_index].name + "', model expects '" +
                       m.class_attribute().name + "'");
  }
}

inline void check_schema(const ForestModel& m, const Dataset& d) { check_schema(m, d.attributes(), d.class_index()); }

namespace detail {

struct ResolvedSampling {
  std::optional<SampleSize> sample_size;
  std::size_t mtry = 1;
};

inline ResolvedSampling resolve_params(const ForestParams& p, const ClassDistribution& dist, std::size_t features) {
  if (p.num_trees < 1) throw argument_error("num_trees must be at least 1");
  if (p.min_leaf < 1) throw argument_error("min_leaf must be at least 1");
  ResolvedSampling r;
  r.mtry = p.mtry.value_or(default_mtry(features));
  if (r.mtry < 1 || r.mtry > features) {
    throw argument_error("mtry must lie in [1, " + std::to_string(features) + "], got " + std::to_string(r.mtry));
  }
  if (p.sample_size) {
    if (p.sample_size->size() != dist.counts.size()) {
      throw argument_error("sample size has " + std::to_string(p.sample_size->size()) + " entries, the data has " +
                           std::to_string(dist.counts.size()) + " classes");
    }
    r.sample_size = p.sample_size;
  } else if (p.balanced) {
    r.sample_size = default_sample_size(dist);
  }
  return r;
}

}  // namespace detail

// The bootstrap sample of tree `tree_index`, drawn from the tree's own
// stream. `rng` is left positioned where tree growth continues.
inline IndexSample draw_tree_sample(const std::optional<SampleSize>& sample_size,
                                    const std::vector<std::vector<std::size_t>>& by_class, std::size_t num_rows,
                                    RandomSource& rng) {
  return sample_size ? balanced_bootstrap(by_class, *sample_size, rng) : bootstrap(num_rows, rng);
}

// Trains RF (plain bootstrap) or BRF (per-class bootstrap). Tree i uses the
// stream derive_seed(master_seed, i), so the result does not depend on
// `workers`.
inline ForestModel train_forest(const Dataset& d, const ForestParams& p, std::size_t workers = default_workers()) {
  d.require_labeled();
  if (d.num_classes() != 2) {
    throw unsupported_error("training needs exactly two class labels, '" + d.class_attribute().name + "' has " +
                            std::to_string(d.num_classes()));
  }
  if (d.num_features() == 0) throw argument_error("dataset has no features besides the class");
  const ClassDistribution dist = class_distribution(d);
  for (std::size_t c = 0; c < dist.counts.size(); ++c) {
    if (dist.counts[c] == 0) {
      throw argument_error("class '" + d.class_attribute().domain[c] + "' has no instances in the training data");
    }
  }
  const auto resolved = detail::resolve_params(p, dist, d.num_features());

  ForestModel model;
  model.params = p;
  model.params.mtry = resolved.mtry;
  model.params.sample_size = resolved.sample_size;
  model.params.balanced = resolved.sample_size.has_value();
  model.relation = d.name();
  model.schema.assign(d.attributes().begin(), d.attributes().end());
  model.class_index = d.class_index();
  model.training_size = d.size();
  model.imputation = compute_imputation(d, EmptyColumnPolicy::fill_constant);

  const FeatureTable table(apply_imputation(d, model.imputation));
  const auto by_class = rows_by_class(table.labels(), table.num_classes());

  model.trees.resize(p.num_trees);
  model.oob_indices.resize(p.num_trees);
  parallel_for(p.num_trees, workers, [&](std::size_t i) {
    const std::uint64_t seed = derive_seed(p.master_seed, i);
    RandomSource rng(seed);
    const IndexSample sample = draw_tree_sample(resolved.sample_size, by_class, table.num_rows(), rng);
    model.trees[i] = grow_tree(table, sample, TreeParams{resolved.mtry, p.min_leaf, seed}, rng);

    std::vector<bool> drawn(table.num_rows(), false);
    for (auto r : sample.indices) drawn[r] = true;
    auto& oob = model.oob_indices[i];
    for (std::size_t r = 0; r < drawn.size(); ++r) {
      if (!drawn[r]) oob.push_back(r);
    }
  });
  return model;
}

struct Prediction {
  std::size_t label = 0;
  std::vector<std::size_t> votes;
};

inline std::size_t plurality(std::span<const std::size_t> votes) { return argmax_lowest(votes); }

// Hard plurality vote over already-imputed attribute-indexed rows.
inline Prediction predict_row(const ForestModel& m, std::span<const double> row) {
  Prediction p;
  p.votes.assign(m.num_classes(), 0);
  for (const auto& tree : m.trees) {
    const auto& counts = tree.route(row).class_counts;
    ++p.votes[argmax_lowest(std::span<const std::size_t>(counts))];
  }
  p.label = plurality(p.votes);
  return p;
}

// One hard vote per tree; the most common label wins, ties to the lowest
// class index. Missing cells are filled from the training statistics.
inline Prediction predict(const ForestModel& m, const Instance& x) {
  if (x.cells.size() != m.schema.size()) {
    throw schema_error("instance has " + std::to_string(x.cells.size()) + " values, model expects " +
                       std::to_string(m.schema.size()));
  }
  for (std::size_t a = 0; a < x.cells.size(); ++a) {
    const Cell& c = x.cells[a];
    if (c.is_missing()) continue;
    const AttributeSpec& attr = m.schema[a];
    if (attr.is_nominal() != c.is_category() ||
        (attr.is_nominal() && c.as_category() >= attr.domain.size())) {
      throw schema_error("value for attribute '" + attr.name + "' does not match the model schema");
    }
  }
  const Instance filled = apply_imputation(x, m.imputation, m.class_index);
  return predict_row(m, to_row(filled, m.class_index));
}

inline std::vector<Prediction> predict_all(const ForestModel& m, const Dataset& d) {
  check_schema(m, d);
  std::vector<Prediction> out;
  out.reserve(d.size());
  for (const auto& inst : d.instances()) out.push_back(predict(m, inst));
  return out;
}

struct OobEstimate {
  double error = 0.0;
  // Misclassification rate per class; 0 for a class with no evaluated instance.
  std::vector<double> class_error;
  std::size_t evaluated = 0;
  // Instances that every tree drew.
  std::size_t skipped = 0;
};

// Out-of-bag error: every training instance is voted on only by the trees
// that did not draw it.
inline OobEstimate oob_error(const ForestModel& m, const Dataset& d) {
  if (d.size() != m.training_size) {
    throw argument_error("dataset has " + std::to_string(d.size()) + " instances, the model was trained on " +
                         std::to_string(m.training_size));
  }
  check_schema(m, d);
  d.require_labeled();
  const FeatureTable table(apply_imputation(d, m.imputation));
  const std::size_t k = m.num_classes();
  std::vector<std::vector<std::size_t>> votes(d.size(), std::vector<std::size_t>(k, 0));
  std::vector<double> row(table.num_attributes(), 0.0);
  for (std::size_t t = 0; t < m.trees.size(); ++t) {
    for (auto r : m.oob_indices.at(t)) {
      for (std::size_t a = 0; a < table.num_attributes(); ++a) {
        if (a != table.class_index()) row[a] = table.value(a, r);
      }
      const auto& counts = m.trees[t].route(row).class_counts;
      ++votes[r][argmax_lowest(std::span<const std::size_t>(counts))];
    }
  }
  OobEstimate est;
  std::vector<std::size_t> wrong(k, 0), seen(k, 0);
  std::size_t total_wrong = 0;
  for (std::size_t r = 0; r < d.size(); ++r) {
    std::size_t cast = 0;
    for (auto v : votes[r]) cast += v;
    if (cast == 0) {
      ++est.skipped;
      continue;
    }
    const std::size_t truth = table.label(r);
    ++seen[truth];
    ++est.evaluated;
    if (plurality(votes[r]) != truth) {
      ++wrong[truth];
      ++total_wrong;
    }
  }
  est.error = est.evaluated == 0 ? 0.0 : static_cast<double>(total_wrong) / static_cast<double>(est.evaluated);
  est.class_error.resize(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    if (seen[c] > 0) est.class_error[c] = static_cast<double>(wrong[c]) / static_cast<double>(seen[c]);
  }
  return est;
}

}  // namespace brf
