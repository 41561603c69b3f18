#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "brf/dataset.hpp"
#include "brf/error.hpp"
#include "brf/forest.hpp"
#include "brf/parallel.hpp"
#include "brf/random.hpp"
#include "brf/text.hpp"

namespace brf {

struct FoldAssignment {
  std::vector<std::size_t> fold_of;
  std::size_t folds = 0;

  std::vector<std::size_t> rows_in(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < fold_of.size(); ++r) {
      if (fold_of[r] == fold) rows.push_back(r);
    }
    return rows;
  }
  std::vector<std::size_t> rows_outside(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < fold_of.size(); ++r) {
      if (fold_of[r] != fold) rows.push_back(r);
    }
    return rows;
  }

  friend bool operator==(const FoldAssignment&, const FoldAssignment&) = default;
};

// Shuffles each class and deals its rows round-robin over the folds. Dealing
// continues where the previous class stopped, which keeps fold sizes within
// one of each other as well as per-class counts.
inline FoldAssignment stratified_folds(const Dataset& d, std::size_t k, RandomSource& rng) {
  if (k < 2) throw argument_error("cross-validation needs at least 2 folds");
  const auto dist = class_distribution(d);
  for (std::size_t c = 0; c < dist.counts.size(); ++c) {
    if (dist.counts[c] < k) {
      throw argument_error("class '" + d.class_attribute().domain[c] + "' has " + std::to_string(dist.counts[c]) +
                           " instances, fewer than the " + std::to_string(k) + " folds");
    }
  }
  std::vector<std::uint32_t> labels(d.size());
  for (std::size_t r = 0; r < d.size(); ++r) labels[r] = d.class_of(r);
  auto by_class = rows_by_class(labels, d.num_classes());

  FoldAssignment out;
  out.folds = k;
  out.fold_of.assign(d.size(), 0);
  std::size_t next = 0;
  for (auto& rows : by_class) {
    rng.shuffle(std::span<std::size_t>(rows));
    for (auto r : rows) {
      out.fold_of[r] = next;
      next = (next + 1) % k;
    }
  }
  return out;
}

// Unstratified: one shuffle of all rows, dealt round-robin.
inline FoldAssignment random_folds(const Dataset& d, std::size_t k, RandomSource& rng) {
  if (k < 2) throw argument_error("cross-validation needs at least 2 folds");
  if (d.size() < k) throw argument_error("fewer instances than folds");
  std::vector<std::size_t> rows(d.size());
  for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
  rng.shuffle(std::span<std::size_t>(rows));
  FoldAssignment out;
  out.folds = k;
  out.fold_of.assign(d.size(), 0);
  for (std::size_t i = 0; i < rows.size(); ++i) out.fold_of[rows[i]] = i % k;
  return out;
}

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = 2) : classes_(classes), counts_(classes * classes, 0) {}

  std::size_t classes() const noexcept { return classes_; }
  std::size_t& at(std::size_t actual, std::size_t predicted) { return counts_.at(actual * classes_ + predicted); }
  std::size_t at(std::size_t actual, std::size_t predicted) const { return counts_.at(actual * classes_ + predicted); }

  std::size_t actual_total(std::size_t actual) const {
    std::size_t t = 0;
    for (std::size_t p = 0; p < classes_; ++p) t += at(actual, p);
    return t;
  }
  std::size_t correct() const {
    std::size_t t = 0;
    for (std::size_t c = 0; c < classes_; ++c) t += at(c, c);
    return t;
  }
  std::size_t total() const {
    std::size_t t = 0;
    for (auto v : counts_) t += v;
    return t;
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    if (o.classes_ != classes_) throw argument_error("confusion matrices of different size");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += o.counts_[i];
    return *this;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t classes_;
  std::vector<std::size_t> counts_;
};

inline ConfusionMatrix confusion(std::span<const std::size_t> predictions, std::span<const std::size_t> truth,
                                 std::size_t classes = 2) {
  if (predictions.size() != truth.size()) {
    throw argument_error("predictions and truth differ in length (" + std::to_string(predictions.size()) + " vs " +
                         std::to_string(truth.size()) + ")");
  }
  if (predictions.empty()) throw argument_error("confusion matrix of zero predictions");
  ConfusionMatrix cm(classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= classes || predictions[i] >= classes) throw argument_error("class index out of range");
    ++cm.at(truth[i], predictions[i]);
  }
  return cm;
}

// Percentages. tpr_avg is the unweighted mean of the two per-class rates.
struct MetricsReport {
  double tpr_majority = 0.0;
  double tpr_minority = 0.0;
  double ccr = 0.0;
  double tpr_avg = 0.0;
  ConfusionMatrix confusion;
  std::size_t minority = 1;
  std::size_t num_trees = 0;
  std::string system_label;
};

inline MetricsReport metrics(const ConfusionMatrix& cm, std::size_t minority) {
  if (cm.classes() != 2) throw argument_error("metrics are defined for two classes");
  if (minority > 1) throw argument_error("minority class index must be 0 or 1");
  for (std::size_t c = 0; c < 2; ++c) {
    if (cm.actual_total(c) == 0) throw argument_error("class " + std::to_string(c) + " has no actual instances");
  }
  const std::size_t majority = 1 - minority;
  auto tpr = [&](std::size_t c) {
    return 100.0 * static_cast<double>(cm.at(c, c)) / static_cast<double>(cm.actual_total(c));
  };
  MetricsReport r;
  r.confusion = cm;
  r.minority = minority;
  r.tpr_majority = tpr(majority);
  r.tpr_minority = tpr(minority);
  r.ccr = 100.0 * static_cast<double>(cm.correct()) / static_cast<double>(cm.total());
  r.tpr_avg = (r.tpr_majority + r.tpr_minority) / 2.0;
  return r;
}

inline std::string system_label(const ForestParams& p) { return p.is_balanced() ? "BRF" : "RF"; }

struct CvOptions {
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  bool stratified = true;
  std::size_t workers = default_workers();
};

struct CvResult {
  MetricsReport report;
  FoldAssignment assignment;
  // Held-out prediction for every instance.
  std::vector<std::size_t> predictions;
};

// k-fold cross-validation with pooled held-out predictions. Each fold trains
// on the other folds only, including the imputation statistics. Fold f's
// forest uses master seed derive_seed(seed, f); params.master_seed is not
// used. The minority class is taken from the full dataset.
inline CvResult cross_validate_detailed(const Dataset& d, const ForestParams& params, const CvOptions& options) {
  d.require_labeled();
  if (d.num_classes() != 2) throw unsupported_error("cross-validation needs exactly two class labels");
  RandomSource fold_rng(options.seed);
  CvResult result;
  result.assignment =
      options.stratified ? stratified_folds(d, options.folds, fold_rng) : random_folds(d, options.folds, fold_rng);
  result.predictions.assign(d.size(), 0);

  for (std::size_t f = 0; f < options.folds; ++f) {
    const auto train_rows = result.assignment.rows_outside(f);
    const auto test_rows = result.assignment.rows_in(f);
    ForestParams fold_params = params;
    fold_params.master_seed = derive_seed(options.seed, f);
    const ForestModel model = train_forest(d.subset(train_rows), fold_params, options.workers);
    for (auto r : test_rows) result.predictions[r] = predict(model, d.instance(r)).label;
  }

  std::vector<std::size_t> truth(d.size());
  for (std::size_t r = 0; r < d.size(); ++r) truth[r] = d.class_of(r);
  result.report = metrics(confusion(result.predictions, truth, 2), class_distribution(d).minority_index());
  result.report.num_trees = params.num_trees;
  result.report.system_label = system_label(params);
  return result;
}

inline MetricsReport cross_validate(const Dataset& d, const ForestParams& params, const CvOptions& options) {
  return cross_validate_detailed(d, params, options).report;
}

// --- benchmark ----------------------------------------------------------------

enum class System { brf, rf };

inline std::string_view to_string(System s) { return s == System::brf ? "BRF" : "RF"; }

struct NamedDataset {
  std::string name;
  Dataset data;
};

struct BenchmarkRow {
  std::string dataset;
  MetricsReport report;
};

// Cross product dataset x system x tree count, in that nesting order. `base`
// supplies mtry and min_leaf; tree count and sampling mode are set per row.
// `on_row` is called as each row completes.
inline std::vector<BenchmarkRow> benchmark(std::span<const NamedDataset> datasets, std::span<const std::size_t> tree_counts,
                                           std::span<const System> systems, const CvOptions& options,
                                           const ForestParams& base = {},
                                           const std::function<void(const BenchmarkRow&)>& on_row = {}) {
  std::vector<BenchmarkRow> rows;
  for (const auto& ds : datasets) {
    for (auto system : systems) {
      for (auto trees : tree_counts) {
        ForestParams p = base;
        p.num_trees = trees;
        p.balanced = system == System::brf;
        if (system == System::rf) p.sample_size.reset();
        BenchmarkRow row{ds.name, cross_validate(ds.data, p, options)};
        if (on_row) on_row(row);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

// --- output -------------------------------------------------------------------

inline std::string format_fixed(double v, int precision) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  return std::string(buf, ptr);
}

inline void write_tsv_header(std::ostream& out) { out << "dataset\tsystem\ttrees\tTPR_ma\tTPR_mi\tCCR\tTPR_avg\n"; }

// Full precision.
inline void write_tsv_row(std::ostream& out, std::string_view dataset, const MetricsReport& r) {
  out << dataset << '\t' << r.system_label << '\t' << r.num_trees << '\t' << text::format_real(r.tpr_majority) << '\t'
      << text::format_real(r.tpr_minority) << '\t' << text::format_real(r.ccr) << '\t'
      << text::format_real(r.tpr_avg) << '\n';
}

// One record per row, metrics at one decimal.
inline void write_record(std::ostream& out, std::string_view dataset, const MetricsReport& r) {
  out << "record {\n"
      << "  dataset: " << dataset << '\n'
      << "  system: " << r.system_label << '\n'
      << "  trees: " << r.num_trees << '\n'
      << "  TPR_ma: " << format_fixed(r.tpr_majority, 1) << '\n'
      << "  TPR_mi: " << format_fixed(r.tpr_minority, 1) << '\n'
      << "  CCR: " << format_fixed(r.ccr, 1) << '\n'
      << "  TPR_avg: " << format_fixed(r.tpr_avg, 1) << '\n'
      << "}\n";
}

}  // namespace brf
