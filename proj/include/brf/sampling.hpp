#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "brf/dataset.hpp"
#include "brf/error.hpp"
#include "brf/random.hpp"

namespace brf {

// Per-class bootstrap sample sizes, in class-domain order.
class SampleSize {
 public:
  SampleSize() = default;
  explicit SampleSize(std::vector<std::size_t> per_class) : per_class_(std::move(per_class)) {
    if (per_class_.empty()) throw argument_error("sample size needs at least one class entry");
    for (std::size_t c = 0; c < per_class_.size(); ++c) {
      if (per_class_[c] < 1) {
        throw argument_error("sample size for class " + std::to_string(c) + " must be at least 1");
      }
    }
  }

  std::span<const std::size_t> per_class() const noexcept { return per_class_; }
  std::size_t operator[](std::size_t c) const { return per_class_.at(c); }
  std::size_t size() const noexcept { return per_class_.size(); }
  std::size_t total() const noexcept {
    std::size_t t = 0;
    for (auto v : per_class_) t += v;
    return t;
  }

  friend bool operator==(const SampleSize&, const SampleSize&) = default;

 private:
  std::vector<std::size_t> per_class_;
};

// Multiset of row indices into a dataset; duplicates are expected.
struct IndexSample {
  std::vector<std::size_t> indices;

  std::size_t size() const noexcept { return indices.size(); }
  friend bool operator==(const IndexSample&, const IndexSample&) = default;
};

// Draws |d| rows uniformly with replacement.
inline IndexSample bootstrap(std::size_t num_rows, RandomSource& rng) {
  if (num_rows == 0) throw argument_error("cannot bootstrap an empty dataset");
  IndexSample s;
  s.indices.resize(num_rows);
  for (auto& idx : s.indices) idx = static_cast<std::size_t>(rng.below(num_rows));
  return s;
}

inline IndexSample bootstrap(const Dataset& d, RandomSource& rng) { return bootstrap(d.size(), rng); }

// Rows of each class, class-domain order, row order within a class.
inline std::vector<std::vector<std::size_t>> rows_by_class(std::span<const std::uint32_t> labels,
                                                           std::size_t num_classes) {
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t r = 0; r < labels.size(); ++r) by_class.at(labels[r]).push_back(r);
  return by_class;
}

// For every class c, draws s[c] rows of class c uniformly with replacement.
// Output is grouped by class in domain order, then in draw order. s[c] may
// exceed the class size.
inline IndexSample balanced_bootstrap(const std::vector<std::vector<std::size_t>>& by_class, const SampleSize& s,
                                      RandomSource& rng) {
  if (s.size() != by_class.size()) {
    throw argument_error("sample size has " + std::to_string(s.size()) + " entries but the data has " +
                         std::to_string(by_class.size()) + " classes");
  }
  IndexSample out;
  out.indices.reserve(s.total());
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const auto& members = by_class[c];
    if (members.empty()) {
      throw argument_error("sample size requests " + std::to_string(s[c]) + " draws from class " + std::to_string(c) +
                           ", which has no instances");
    }
    for (std::size_t k = 0; k < s[c]; ++k) out.indices.push_back(members[rng.below(members.size())]);
  }
  return out;
}

inline IndexSample balanced_bootstrap(const Dataset& d, const SampleSize& s, RandomSource& rng) {
  d.require_labeled();
  std::vector<std::uint32_t> labels(d.size());
  for (std::size_t r = 0; r < d.size(); ++r) labels[r] = d.class_of(r);
  return balanced_bootstrap(rows_by_class(labels, d.num_classes()), s, rng);
}

// Every class gets the minority-class count.
inline SampleSize default_sample_size(const ClassDistribution& dist) {
  if (dist.counts.empty()) throw argument_error("class distribution is empty");
  std::size_t smallest = dist.counts.front();
  for (std::size_t c = 0; c < dist.counts.size(); ++c) {
    if (dist.counts[c] == 0) throw argument_error("class " + std::to_string(c) + " has no instances");
    smallest = std::min(smallest, dist.counts[c]);
  }
  return SampleSize(std::vector<std::size_t>(dist.counts.size(), smallest));
}

}  // namespace brf
