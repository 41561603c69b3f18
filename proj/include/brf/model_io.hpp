#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "brf/dataset.hpp"
#include "brf/error.hpp"
#include "brf/forest.hpp"
#include "brf/tree.hpp"

// Model files are JSON documents; docs/model_format.md lists every field.
// Top-level fields are written one per line and each tree on its own line,
// so the output is stable byte for byte and still greppable.

namespace brf {

inline constexpr std::string_view kModelFormat = "brf-forest";
inline constexpr int kModelVersion = 1;

namespace detail {

using json = nlohmann::json;

inline json node_to_json(const DecisionTree& tree, std::size_t at) {
  const Node& node = tree.nodes()[at];
  if (const auto* leaf = std::get_if<Leaf>(&node)) return json{{"type", "leaf"}, {"counts", leaf->class_counts}};
  if (const auto* num = std::get_if<NumericSplit>(&node)) {
    return json{{"type", "numeric"},
                {"attribute", num->attribute},
                {"threshold", num->threshold},
                {"left", node_to_json(tree, num->left)},
                {"right", node_to_json(tree, num->right)}};
  }
  const auto& nom = std::get<NominalSplit>(node);
  json children = json::array();
  for (auto c : nom.children) children.push_back(node_to_json(tree, c));
  return json{{"type", "nominal"}, {"attribute", nom.attribute}, {"children", std::move(children)}};
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw model_error(std::string("model field '") + key + "' is missing");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw model_error(std::string("model field '") + key + "' has the wrong type");
  }
}

class NodeReader {
 public:
  NodeReader(const std::vector<AttributeSpec>& schema, std::size_t class_index)
      : schema_(schema), class_index_(class_index), classes_(schema.at(class_index).domain.size()) {}

  std::vector<Node> read(const json& root) {
    nodes_.clear();
    add(root);
    return std::move(nodes_);
  }

 private:
  std::size_t check_attribute(const json& j) const {
    const auto a = field<std::size_t>(j, "attribute");
    if (a >= schema_.size() || a == class_index_) throw model_error("split on invalid attribute " + std::to_string(a));
    return a;
  }

  std::size_t add(const json& j) {
    const auto type = field<std::string>(j, "type");
    const std::size_t self = nodes_.size();
    nodes_.emplace_back(Leaf{});
    if (type == "leaf") {
      auto counts = field<std::vector<std::size_t>>(j, "counts");
      std::size_t total = 0;
      for (auto c : counts) total += c;
      if (counts.size() != classes_ || total == 0) throw model_error("leaf has invalid class counts");
      nodes_[self] = Leaf{std::move(counts)};
    } else if (type == "numeric") {
      const auto a = check_attribute(j);
      if (schema_[a].is_nominal()) throw model_error("numeric split on nominal attribute " + std::to_string(a));
      const auto threshold = field<double>(j, "threshold");
      const std::size_t left = add(field<json>(j, "left"));
      const std::size_t right = add(field<json>(j, "right"));
      nodes_[self] = NumericSplit{a, threshold, left, right};
    } else if (type == "nominal") {
      const auto a = check_attribute(j);
      const auto& children_json = j.at("children");
      if (!schema_[a].is_nominal() || !children_json.is_array() || children_json.size() != schema_[a].domain.size()) {
        throw model_error("nominal split on attribute " + std::to_string(a) + " does not match its domain");
      }
      std::vector<std::size_t> children;
      for (const auto& c : children_json) children.push_back(add(c));
      nodes_[self] = NominalSplit{a, std::move(children)};
    } else {
      throw model_error("unknown node type '" + type + "'");
    }
    return self;
  }

  const std::vector<AttributeSpec>& schema_;
  std::size_t class_index_;
  std::size_t classes_;
  std::vector<Node> nodes_;
};

}  // namespace detail

inline std::string serialize_model(const ForestModel& m) {
  using detail::json;
  json attributes = json::array();
  for (const auto& a : m.schema) {
    json attr{{"name", a.name}, {"kind", std::string(to_string(a.kind))}};
    if (a.is_nominal()) attr["domain"] = a.domain;
    attributes.push_back(std::move(attr));
  }
  const json schema{{"relation", m.relation}, {"class_index", m.class_index}, {"attributes", std::move(attributes)}};

  json params{{"num_trees", m.params.num_trees},
              {"balanced", m.params.is_balanced()},
              {"min_leaf", m.params.min_leaf},
              {"master_seed", m.params.master_seed},
              {"mtry", m.params.mtry ? json(*m.params.mtry) : json(nullptr)},
              {"sample_size", nullptr}};
  if (m.params.sample_size) {
    params["sample_size"] = std::vector<std::size_t>(m.params.sample_size->per_class().begin(),
                                                     m.params.sample_size->per_class().end());
  }

  json imputation = json::array();
  for (std::size_t a = 0; a < m.imputation.fill.size(); ++a) {
    const auto& fill = m.imputation.fill[a];
    if (!fill) continue;
    if (fill->is_category()) {
      imputation.push_back(json{{"attribute", a}, {"mode", m.schema.at(a).domain.at(fill->as_category())}});
    } else {
      imputation.push_back(json{{"attribute", a}, {"mean", fill->as_number()}});
    }
  }

  std::string out = "{\n";
  out += "\"format\":" + json(kModelFormat).dump() + ",\n";
  out += "\"version\":" + std::to_string(kModelVersion) + ",\n";
  out += "\"schema\":" + schema.dump() + ",\n";
  out += "\"params\":" + params.dump() + ",\n";
  out += "\"training_instances\":" + std::to_string(m.training_size) + ",\n";
  out += "\"imputation\":" + imputation.dump() + ",\n";
  out += "\"trees\":[";
  for (std::size_t t = 0; t < m.trees.size(); ++t) {
    const auto& tree = m.trees[t];
    const json j{{"seed", tree.params().seed},
                 {"mtry", tree.params().mtry},
                 {"min_leaf", tree.params().min_leaf},
                 {"oob", m.oob_indices.at(t)},
                 {"root", detail::node_to_json(tree, 0)}};
    out += t ? ",\n" : "\n";
    out += j.dump();
  }
  out += "\n]\n}\n";
  return out;
}

inline ForestModel deserialize_model(std::string_view document) {
  using detail::field;
  using detail::json;
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw model_error(std::string("model document is truncated or malformed: ") + e.what());
  }
  if (!doc.is_object() || field<std::string>(doc, "format") != kModelFormat) {
    throw model_error("not a " + std::string(kModelFormat) + " model document");
  }
  const auto version = field<int>(doc, "version");
  if (version != kModelVersion) {
    throw version_error("model version " + std::to_string(version) + " is not supported (expected " +
                        std::to_string(kModelVersion) + ")");
  }

  ForestModel m;
  const auto schema = field<json>(doc, "schema");
  m.relation = field<std::string>(schema, "relation");
  m.class_index = field<std::size_t>(schema, "class_index");
  for (const auto& a : field<json>(schema, "attributes")) {
    const auto kind = field<std::string>(a, "kind");
    if (kind == "numeric") {
      m.schema.push_back(AttributeSpec::numeric(field<std::string>(a, "name")));
    } else if (kind == "nominal") {
      m.schema.push_back(AttributeSpec::nominal(field<std::string>(a, "name"), field<std::vector<std::string>>(a, "domain")));
    } else {
      throw model_error("unknown attribute kind '" + kind + "'");
    }
  }
  try {
    Dataset::validate_schema(m.schema, m.class_index);
  } catch (const argument_error& e) {
    throw model_error(std::string("invalid model schema: ") + e.what());
  }

  const auto params = field<json>(doc, "params");
  m.params.num_trees = field<std::size_t>(params, "num_trees");
  m.params.balanced = field<bool>(params, "balanced");
  m.params.min_leaf = field<std::size_t>(params, "min_leaf");
  m.params.master_seed = field<std::uint64_t>(params, "master_seed");
  if (!params.contains("mtry")) throw model_error("model field 'mtry' is missing");
  if (!params.at("mtry").is_null()) m.params.mtry = field<std::size_t>(params, "mtry");
  if (!params.contains("sample_size")) throw model_error("model field 'sample_size' is missing");
  if (!params.at("sample_size").is_null()) {
    try {
      m.params.sample_size = SampleSize(field<std::vector<std::size_t>>(params, "sample_size"));
    } catch (const argument_error& e) {
      throw model_error(std::string("invalid sample size: ") + e.what());
    }
  }
  m.training_size = field<std::size_t>(doc, "training_instances");

  m.imputation.fill.assign(m.schema.size(), std::nullopt);
  for (const auto& entry : field<json>(doc, "imputation")) {
    const auto a = field<std::size_t>(entry, "attribute");
    if (a >= m.schema.size() || a == m.class_index) throw model_error("imputation entry for invalid attribute");
    if (entry.contains("mode")) {
      const auto idx = m.schema[a].index_of(field<std::string>(entry, "mode"));
      if (!m.schema[a].is_nominal() || !idx) throw model_error("imputation mode is not in the attribute's domain");
      m.imputation.fill[a] = Cell::category(*idx);
    } else {
      if (m.schema[a].is_nominal()) throw model_error("imputation mean given for a nominal attribute");
      m.imputation.fill[a] = Cell::number(field<double>(entry, "mean"));
    }
  }

  const auto trees = field<json>(doc, "trees");
  if (!trees.is_array() || trees.size() != m.params.num_trees) {
    throw model_error("model declares " + std::to_string(m.params.num_trees) + " trees but holds " +
                      std::to_string(trees.is_array() ? trees.size() : 0));
  }
  detail::NodeReader reader(m.schema, m.class_index);
  for (const auto& t : trees) {
    TreeParams tp{field<std::size_t>(t, "mtry"), field<std::size_t>(t, "min_leaf"), field<std::uint64_t>(t, "seed")};
    m.trees.emplace_back(reader.read(field<json>(t, "root")), tp, m.num_classes());
    auto oob = field<std::vector<std::size_t>>(t, "oob");
    for (auto r : oob) {
      if (r >= m.training_size) throw model_error("out-of-bag index out of range");
    }
    m.oob_indices.push_back(std::move(oob));
  }
  return m;
}

}  // namespace brf
