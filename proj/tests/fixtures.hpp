#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "brf/brf.hpp"

namespace brf::fixtures {

// Dataset with numeric features from `rows` (one vector per instance) and a
// nominal class {A, B, ...} taken from `labels`.
inline Dataset numeric_dataset(const std::vector<std::vector<double>>& rows, const std::vector<std::uint32_t>& labels,
                               std::size_t classes = 2) {
  std::vector<AttributeSpec> attrs;
  const std::size_t f = rows.empty() ? 1 : rows.front().size();
  for (std::size_t a = 0; a < f; ++a) attrs.push_back(AttributeSpec::numeric("x" + std::to_string(a)));
  std::vector<std::string> domain;
  for (std::size_t c = 0; c < classes; ++c) domain.push_back(std::string(1, static_cast<char>('A' + c)));
  attrs.push_back(AttributeSpec::nominal("class", domain));
  std::vector<Instance> instances;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Instance inst;
    for (double v : rows[r]) inst.cells.push_back(Cell::number(v));
    inst.cells.push_back(Cell::category(labels.at(r)));
    instances.push_back(std::move(inst));
  }
  return Dataset("fixture", std::move(attrs), f, std::move(instances));
}

// Single numeric feature equal to the row index; classes as given.
inline Dataset class_counts_dataset(const std::vector<std::size_t>& counts) {
  std::vector<std::vector<double>> rows;
  std::vector<std::uint32_t> labels;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (std::size_t i = 0; i < counts[c]; ++i) {
      rows.push_back({static_cast<double>(rows.size())});
      labels.push_back(static_cast<std::uint32_t>(c));
    }
  }
  return numeric_dataset(rows, labels, counts.size());
}

inline double normal(RandomSource& rng) {
  double u1 = rng.uniform();
  while (u1 <= 0.0) u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

struct SyntheticSpec {
  std::size_t instances = 3000;
  double minority_fraction = 0.05;
  std::size_t informative = 4;  // numeric, minority mean shifted
  std::size_t noise = 8;        // numeric, no signal
  std::size_t nominal = 3;      // 3-category, weak signal
  double shift = 1.2;           // in standard deviations
  double missing_rate = 0.02;
  std::uint64_t seed = 7;
};

// Imbalanced two-class data with overlapping classes, in the spirit of
// clinical screening sets: majority "negative", minority "positive".
inline Dataset synthetic_imbalanced(const SyntheticSpec& spec) {
  RandomSource rng(spec.seed);
  std::vector<AttributeSpec> attrs;
  for (std::size_t i = 0; i < spec.informative; ++i) attrs.push_back(AttributeSpec::numeric("signal" + std::to_string(i)));
  for (std::size_t i = 0; i < spec.noise; ++i) attrs.push_back(AttributeSpec::numeric("noise" + std::to_string(i)));
  for (std::size_t i = 0; i < spec.nominal; ++i) {
    attrs.push_back(AttributeSpec::nominal("flag" + std::to_string(i), {"low", "mid", "high"}));
  }
  attrs.push_back(AttributeSpec::nominal("class", {"negative", "positive"}));
  const std::size_t class_index = attrs.size() - 1;
  const auto minority = static_cast<std::size_t>(std::llround(spec.minority_fraction * static_cast<double>(spec.instances)));

  std::vector<Instance> instances;
  for (std::size_t r = 0; r < spec.instances; ++r) {
    const bool positive = r < minority;
    Instance inst;
    for (std::size_t i = 0; i < spec.informative; ++i) {
      inst.cells.push_back(Cell::number(normal(rng) + (positive ? spec.shift : 0.0)));
    }
    for (std::size_t i = 0; i < spec.noise; ++i) inst.cells.push_back(Cell::number(normal(rng)));
    for (std::size_t i = 0; i < spec.nominal; ++i) {
      const double u = rng.uniform();
      const double high = positive ? 0.5 : 0.3;
      inst.cells.push_back(Cell::category(u < high ? 2 : (u < high + 0.3 ? 1 : 0)));
    }
    for (std::size_t a = 0; a < inst.cells.size(); ++a) {
      if (rng.uniform() < spec.missing_rate) inst.cells[a] = Cell::missing();
    }
    inst.cells.push_back(Cell::category(positive ? 1 : 0));
    instances.push_back(std::move(inst));
  }
  // Interleave classes so row order carries no signal.
  rng.shuffle(std::span<Instance>(instances));
  return Dataset("synthetic", std::move(attrs), class_index, std::move(instances));
}

// FNV-1a, for pinning structure dumps.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace brf::fixtures
