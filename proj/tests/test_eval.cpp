#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "brf/eval.hpp"
#include "fixtures.hpp"

using namespace brf;

namespace {

std::vector<std::size_t> fold_class_counts(const Dataset& d, const FoldAssignment& a, std::size_t fold, std::size_t c) {
  std::size_t n = 0;
  for (auto r : a.rows_in(fold)) n += d.class_of(r) == c ? 1 : 0;
  return {n};
}

void expect_identities(const MetricsReport& r) {
  EXPECT_NEAR(r.tpr_avg, (r.tpr_majority + r.tpr_minority) / 2.0, 1e-9 * std::max(1.0, std::abs(r.tpr_avg)));
  const auto& cm = r.confusion;
  const double n = static_cast<double>(cm.total());
  const std::size_t ma = 1 - r.minority;
  const double weighted = (static_cast<double>(cm.actual_total(ma)) * r.tpr_majority +
                           static_cast<double>(cm.actual_total(r.minority)) * r.tpr_minority) /
                          n;
  EXPECT_NEAR(r.ccr, weighted, 1e-9 * std::max(1.0, std::abs(r.ccr)));
}

// Class is a deterministic function of x0; x1 is noise.
Dataset separable(std::size_t n) {
  RandomSource rng(11);
  std::vector<std::vector<double>> rows;
  std::vector<std::uint32_t> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const bool b = i % 4 == 0;
    rows.push_back({b ? 10.0 + rng.uniform() : rng.uniform(), rng.uniform()});
    labels.push_back(b ? 1 : 0);
  }
  return fixtures::numeric_dataset(rows, labels);
}

}  // namespace

TEST(StratifiedFolds, BalancedTwentyRows) {
  const Dataset d = fixtures::class_counts_dataset({10, 10});
  RandomSource rng(1);
  const auto a = stratified_folds(d, 10, rng);
  for (std::size_t f = 0; f < 10; ++f) {
    EXPECT_EQ(fold_class_counts(d, a, f, 0)[0], 1u);
    EXPECT_EQ(fold_class_counts(d, a, f, 1)[0], 1u);
  }
}

TEST(StratifiedFolds, UnevenClasses) {
  const Dataset d = fixtures::class_counts_dataset({21, 10});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RandomSource rng(seed);
    const auto a = stratified_folds(d, 10, rng);
    std::size_t total = 0;
    for (std::size_t f = 0; f < 10; ++f) {
      const auto ca = fold_class_counts(d, a, f, 0)[0];
      EXPECT_TRUE(ca == 2 || ca == 3) << ca;
      EXPECT_EQ(fold_class_counts(d, a, f, 1)[0], 1u);
      total += a.rows_in(f).size();
    }
    EXPECT_EQ(total, d.size());
  }
}

TEST(StratifiedFolds, ProportionalOnImbalancedData) {
  const Dataset d = fixtures::class_counts_dataset({3012, 151});
  RandomSource rng(5);
  const auto a = stratified_folds(d, 10, rng);
  for (std::size_t f = 0; f < 10; ++f) {
    const auto mi = fold_class_counts(d, a, f, 1)[0];
    EXPECT_TRUE(mi == 15 || mi == 16) << mi;
    const auto size = a.rows_in(f).size();
    EXPECT_TRUE(size == 316 || size == 317) << size;
  }
}

TEST(StratifiedFolds, DeterministicForSeed) {
  const Dataset d = fixtures::class_counts_dataset({40, 13});
  RandomSource a(9), b(9), c(10);
  const auto fa = stratified_folds(d, 5, a);
  EXPECT_EQ(fa, stratified_folds(d, 5, b));
  EXPECT_NE(fa, stratified_folds(d, 5, c));
}

TEST(StratifiedFolds, Errors) {
  RandomSource rng(1);
  try {
    stratified_folds(fixtures::class_counts_dataset({20, 9}), 10, rng);
    FAIL();
  } catch (const argument_error& e) {
    EXPECT_NE(std::string(e.what()).find("'B'"), std::string::npos);
  }
  EXPECT_THROW(stratified_folds(fixtures::class_counts_dataset({20, 20}), 1, rng), argument_error);
  EXPECT_THROW(random_folds(fixtures::class_counts_dataset({2, 2}), 5, rng), argument_error);
}

TEST(RandomFolds, CoverEveryRowOnce) {
  const Dataset d = fixtures::class_counts_dataset({33, 4});
  RandomSource rng(2);
  const auto a = random_folds(d, 10, rng);
  std::size_t total = 0;
  for (std::size_t f = 0; f < 10; ++f) {
    const auto n = a.rows_in(f).size();
    EXPECT_TRUE(n == 3 || n == 4);
    total += n;
  }
  EXPECT_EQ(total, 37u);
}

TEST(Confusion, Examples) {
  const std::vector<std::size_t> ab{0, 1};
  const auto diag = confusion(ab, ab);
  EXPECT_EQ(diag.at(0, 0), 1u);
  EXPECT_EQ(diag.at(1, 1), 1u);
  EXPECT_EQ(diag.at(0, 1) + diag.at(1, 0), 0u);

  const std::vector<std::size_t> aa{0, 0};
  const auto off = confusion(aa, ab);
  EXPECT_EQ(off.at(1, 0), 1u);
  EXPECT_EQ(off.at(0, 0), 1u);
  EXPECT_EQ(off.correct(), 1u);

  EXPECT_THROW(confusion(std::vector<std::size_t>{}, std::vector<std::size_t>{}), argument_error);
  EXPECT_THROW(confusion(aa, std::vector<std::size_t>{0}), argument_error);
  EXPECT_THROW(confusion(std::vector<std::size_t>{2}, std::vector<std::size_t>{0}), argument_error);
}

TEST(Metrics, PerfectDiagonal) {
  ConfusionMatrix cm;
  cm.at(0, 0) = 7;
  cm.at(1, 1) = 3;
  const auto r = metrics(cm, 1);
  EXPECT_EQ(r.tpr_majority, 100.0);
  EXPECT_EQ(r.tpr_minority, 100.0);
  EXPECT_EQ(r.ccr, 100.0);
  EXPECT_EQ(r.tpr_avg, 100.0);
}

TEST(Metrics, WorkedExample) {
  ConfusionMatrix cm;
  cm.at(0, 0) = 81;
  cm.at(0, 1) = 9;
  cm.at(1, 1) = 5;
  cm.at(1, 0) = 5;
  const auto r = metrics(cm, 1);
  EXPECT_DOUBLE_EQ(r.tpr_majority, 90.0);
  EXPECT_DOUBLE_EQ(r.tpr_minority, 50.0);
  EXPECT_DOUBLE_EQ(r.ccr, 86.0);
  EXPECT_DOUBLE_EQ(r.tpr_avg, 70.0);
  expect_identities(r);
}

TEST(Metrics, AlwaysMajorityClassifier) {
  ConfusionMatrix cm;
  cm.at(0, 0) = 3012;
  cm.at(1, 0) = 151;
  const auto r = metrics(cm, 1);
  EXPECT_EQ(r.tpr_majority, 100.0);
  EXPECT_EQ(r.tpr_minority, 0.0);
  EXPECT_NEAR(r.ccr, 95.23, 0.005);
  EXPECT_EQ(r.tpr_avg, 50.0);
}

TEST(Metrics, MinorityIndexZero) {
  ConfusionMatrix cm;
  cm.at(0, 0) = 1;
  cm.at(0, 1) = 1;
  cm.at(1, 1) = 8;
  const auto r = metrics(cm, 0);
  EXPECT_EQ(r.tpr_minority, 50.0);
  EXPECT_EQ(r.tpr_majority, 100.0);
}

TEST(Metrics, Errors) {
  ConfusionMatrix cm;
  cm.at(0, 0) = 4;
  EXPECT_THROW(metrics(cm, 1), argument_error);
  EXPECT_THROW(metrics(ConfusionMatrix(3), 1), argument_error);
}

TEST(Metrics, IdentitiesOnRandomMatrices) {
  RandomSource rng(31);
  for (int i = 0; i < 2000; ++i) {
    ConfusionMatrix cm;
    cm.at(0, 0) = rng.below(5000);
    cm.at(0, 1) = 1 + rng.below(500);
    cm.at(1, 0) = rng.below(300);
    cm.at(1, 1) = 1 + rng.below(300);
    expect_identities(metrics(cm, rng.below(2)));
  }
}

TEST(CrossValidate, SeparableDatasetIsPerfect) {
  const Dataset d = separable(80);
  for (std::size_t k : {2u, 5u, 10u}) {
    for (std::uint64_t seed : {1ULL, 77ULL}) {
      ForestParams p;
      p.num_trees = 5;
      p.mtry = 2;
      CvOptions o;
      o.folds = k;
      o.seed = seed;
      const auto r = cross_validate(d, p, o);
      EXPECT_EQ(r.ccr, 100.0);
      EXPECT_EQ(r.confusion.total(), d.size());
    }
  }
}

TEST(CrossValidate, EachInstancePredictedOnceWithoutLeakage) {
  const Dataset d = fixtures::synthetic_imbalanced({.instances = 400, .minority_fraction = 0.1});
  ForestParams p;
  p.num_trees = 7;
  p.balanced = true;
  CvOptions o;
  o.folds = 5;
  o.seed = 3;
  const auto res = cross_validate_detailed(d, p, o);
  EXPECT_EQ(res.report.confusion.total(), d.size());
  expect_identities(res.report);
  EXPECT_EQ(res.report.system_label, "BRF");
  EXPECT_EQ(res.report.num_trees, 7u);
  EXPECT_EQ(res.report.minority, 1u);

  // Re-run each fold by hand: the model that predicts fold f is a function of
  // the other folds only, so scrambling fold f's features must not change it.
  for (std::size_t f = 0; f < o.folds; ++f) {
    std::vector<Instance> rows(d.instances().begin(), d.instances().end());
    RandomSource junk(f);
    for (auto r : res.assignment.rows_in(f)) {
      for (std::size_t a = 0; a < d.num_features(); ++a) {
        if (!d.attributes()[a].is_nominal()) rows[r].cells[a] = Cell::number(1e6 * junk.uniform());
      }
    }
    const Dataset scrambled = d.with_instances(rows);
    ForestParams fp = p;
    fp.master_seed = derive_seed(o.seed, f);
    const ForestModel clean = train_forest(d.subset(res.assignment.rows_outside(f)), fp, 1);
    const ForestModel dirty = train_forest(scrambled.subset(res.assignment.rows_outside(f)), fp, 1);
    EXPECT_EQ(clean, dirty);
    for (auto r : res.assignment.rows_in(f)) EXPECT_EQ(predict(clean, d.instance(r)).label, res.predictions[r]);
  }
}

TEST(CrossValidate, DeterministicAcrossRunsAndWorkers) {
  const Dataset d = fixtures::synthetic_imbalanced({.instances = 500});
  ForestParams p;
  p.num_trees = 10;
  CvOptions o;
  o.workers = 1;
  const auto a = cross_validate_detailed(d, p, o);
  o.workers = 4;
  const auto b = cross_validate_detailed(d, p, o);
  EXPECT_EQ(a.predictions, b.predictions);
  EXPECT_EQ(a.report.confusion, b.report.confusion);
  std::ostringstream sa, sb;
  write_tsv_row(sa, "x", a.report);
  write_tsv_row(sb, "x", b.report);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(CrossValidate, RejectsTooSmallClass) {
  ForestParams p;
  p.num_trees = 1;
  EXPECT_THROW(cross_validate(fixtures::class_counts_dataset({50, 4}), p, {}), argument_error);
  EXPECT_THROW(cross_validate(fixtures::class_counts_dataset({20, 20, 20}), p, {}), unsupported_error);
}

TEST(Benchmark, Cardinality) {
  std::vector<NamedDataset> sets;
  for (int i = 0; i < 5; ++i) sets.push_back({"d" + std::to_string(i), separable(40)});
  const std::vector<std::size_t> trees{1, 2, 3};
  const std::vector<System> systems{System::brf, System::rf};
  CvOptions o;
  o.folds = 2;
  std::size_t streamed = 0;
  const auto rows = benchmark(sets, trees, systems, o, {}, [&](const BenchmarkRow&) { ++streamed; });
  ASSERT_EQ(rows.size(), 30u);
  EXPECT_EQ(streamed, 30u);
  EXPECT_EQ(rows[0].dataset, "d0");
  EXPECT_EQ(rows[0].report.system_label, "BRF");
  EXPECT_EQ(rows[3].report.system_label, "RF");
  EXPECT_EQ(rows[4].report.num_trees, 2u);
  EXPECT_EQ(rows[29].dataset, "d4");
  for (const auto& r : rows) expect_identities(r.report);
}

TEST(Output, Formats) {
  ConfusionMatrix cm;
  cm.at(0, 0) = 81;
  cm.at(0, 1) = 9;
  cm.at(1, 1) = 5;
  cm.at(1, 0) = 5;
  auto r = metrics(cm, 1);
  r.num_trees = 100;
  r.system_label = "BRF";
  std::ostringstream tsv;
  write_tsv_header(tsv);
  write_tsv_row(tsv, "HY1", r);
  EXPECT_EQ(tsv.str(), "dataset\tsystem\ttrees\tTPR_ma\tTPR_mi\tCCR\tTPR_avg\nHY1\tBRF\t100\t90\t50\t86\t70\n");
  std::ostringstream rec;
  write_record(rec, "HY1", r);
  EXPECT_NE(rec.str().find("  TPR_avg: 70.0\n"), std::string::npos);
  EXPECT_EQ(format_fixed(97.04999, 1), "97.0");
}

// Balancing should raise minority recall on overlapping, imbalanced data.
TEST(Benchmark, BalancedRaisesMinorityRateOnSyntheticImbalance) {
  const Dataset d = fixtures::synthetic_imbalanced({.instances = 2000, .minority_fraction = 0.06});
  ForestParams rf;
  rf.num_trees = 50;
  ForestParams brf = rf;
  brf.balanced = true;
  const auto a = cross_validate(d, rf, {});
  const auto b = cross_validate(d, brf, {});
  EXPECT_GT(b.tpr_minority, a.tpr_minority + 10.0);
  EXPECT_GT(b.tpr_avg, a.tpr_avg);
  EXPECT_GT(a.ccr, b.ccr);
}
