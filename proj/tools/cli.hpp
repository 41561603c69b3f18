#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "brf/brf.hpp"

namespace brf::cli {

enum class Format { auto_detect, arff, csv };
enum class Output { text, tsv };

struct DataOptions {
  Format format = Format::auto_detect;
  std::string class_column;
};

struct ForestOptions {
  std::size_t trees = 100;
  bool balanced = false;
  std::vector<std::size_t> sample_size;
  std::size_t mtry = 0;  // 0 = default
  std::size_t min_leaf = 1;
  std::uint64_t seed = 1;
  std::size_t workers = default_workers();

  ForestParams params() const {
    ForestParams p;
    p.num_trees = trees;
    p.balanced = balanced;
    if (!sample_size.empty()) p.sample_size = SampleSize(sample_size);
    if (mtry != 0) p.mtry = mtry;
    p.min_leaf = min_leaf;
    p.master_seed = seed;
    return p;
  }
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Dataset load_dataset(const std::string& path, const DataOptions& opts, bool allow_unlabeled = false) {
  Format format = opts.format;
  const auto ext = std::filesystem::path(path).extension().string();
  if (format == Format::auto_detect) {
    if (text::iequals(ext, ".arff")) {
      format = Format::arff;
    } else if (text::iequals(ext, ".csv")) {
      format = Format::csv;
    } else {
      throw error("cannot infer the format of '" + path + "' from its extension; pass --format");
    }
  }
  const std::string content = read_file(path);
  ReadOptions ro{opts.class_column, allow_unlabeled};
  try {
    if (format == Format::arff) return parse_arff(content, ro);
    return parse_csv(content, ro, std::filesystem::path(path).stem().string());
  } catch (const error& e) {
    throw error(path + ": " + e.what());
  }
}

inline std::string dataset_label(const std::string& path) { return std::filesystem::path(path).stem().string(); }

inline void add_data_options(CLI::App& cmd, DataOptions& opts) {
  cmd.add_option("--format", opts.format, "Input format: auto (by extension), arff or csv")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Format>{{"auto", Format::auto_detect}, {"arff", Format::arff}, {"csv", Format::csv}},
          CLI::ignore_case))
      ->default_str("auto");
  cmd.add_option("--class", opts.class_column,
                 "Class attribute by name or 0-based position (default: last attribute)");
}

inline void add_forest_options(CLI::App& cmd, ForestOptions& opts, bool single_tree_count) {
  if (single_tree_count) {
    cmd.add_option("--trees", opts.trees, "Number of trees")->check(CLI::PositiveNumber)->capture_default_str();
    auto* balanced =
        cmd.add_flag("--balanced", opts.balanced, "Balanced bootstrap per class (BRF); default size = minority count");
    cmd.add_option("--sample-size", opts.sample_size, "Explicit per-class sample sizes, e.g. 5,5 (needs --balanced)")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->needs(balanced);
  }
  cmd.add_option("--mtry", opts.mtry, "Candidate features per node (default floor(log2 F) + 1)")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--min-leaf", opts.min_leaf, "Minimum instances on each side of a split")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--seed", opts.seed, "Master random seed")->capture_default_str();
  cmd.add_option("--workers", opts.workers, "Worker threads; results do not depend on this")
      ->check(CLI::PositiveNumber)
      ->default_str("available cores");
}

inline void add_output_option(CLI::App& cmd, Output& out) {
  cmd.add_option("--output", out, "Output style: text or tsv")
      ->transform(CLI::CheckedTransformer(std::map<std::string, Output>{{"text", Output::text}, {"tsv", Output::tsv}},
                                          CLI::ignore_case))
      ->default_str("text");
}

// --- commands -------------------------------------------------------------------

inline void cmd_info(const std::string& path, const DataOptions& opts, std::ostream& out) {
  const Dataset d = load_dataset(path, opts);
  const ClassDistribution dist = class_distribution(d);
  const auto& cls = d.class_attribute();
  std::size_t missing = 0;
  for (const auto& inst : d.instances()) {
    for (const auto& c : inst.cells) missing += c.is_missing() ? 1 : 0;
  }
  out << "file: " << path << '\n'
      << "relation: " << d.name() << '\n'
      << "instances: " << d.size() << '\n'
      << "attributes: " << d.num_attributes() << " (" << d.num_features() << " without class)\n"
      << "class: " << cls.name << '\n'
      << "labels:";
  for (const auto& label : cls.domain) out << ' ' << label;
  out << "\ncounts:";
  for (std::size_t c = 0; c < dist.counts.size(); ++c) out << ' ' << cls.domain[c] << '=' << dist.counts[c];
  out << "\nmissing cells: " << missing << '\n';
  if (d.size() > 0) {
    out << "minority: " << format_fixed(100.0 * dist.minority_fraction(), 2) << "% ("
        << cls.domain[dist.minority_index()] << ")\n";
  }
}

inline void print_confusion(std::ostream& out, const ConfusionMatrix& cm, const AttributeSpec& cls) {
  out << "confusion (rows actual, columns predicted):\n";
  std::size_t width = 8;
  for (const auto& l : cls.domain) width = std::max(width, l.size() + 2);
  auto pad = [&](const std::string& s) { return s + std::string(width > s.size() ? width - s.size() : 1, ' '); };
  out << pad("");
  for (const auto& l : cls.domain) out << pad(l);
  out << '\n';
  for (std::size_t a = 0; a < cm.classes(); ++a) {
    out << pad(cls.domain[a]);
    for (std::size_t p = 0; p < cm.classes(); ++p) out << pad(std::to_string(cm.at(a, p)));
    out << '\n';
  }
}

inline void cmd_cv(const std::string& path, const DataOptions& data, const ForestOptions& forest, std::size_t folds,
                   bool stratified, Output output, std::ostream& out) {
  const Dataset d = load_dataset(path, data);
  const CvOptions cv{folds, forest.seed, stratified, forest.workers};
  const MetricsReport r = cross_validate(d, forest.params(), cv);
  const std::string name = dataset_label(path);
  if (output == Output::tsv) {
    write_tsv_header(out);
    write_tsv_row(out, name, r);
    return;
  }
  out << "dataset: " << name << '\n'
      << "system: " << r.system_label << '\n'
      << "trees: " << r.num_trees << '\n'
      << "folds: " << folds << (stratified ? " (stratified)" : "") << '\n'
      << "seed: " << forest.seed << '\n'
      << "minority: " << d.class_attribute().domain[r.minority] << '\n'
      << "TPR_ma: " << format_fixed(r.tpr_majority, 1) << '\n'
      << "TPR_mi: " << format_fixed(r.tpr_minority, 1) << '\n'
      << "CCR: " << format_fixed(r.ccr, 1) << '\n'
      << "TPR_avg: " << format_fixed(r.tpr_avg, 1) << '\n';
  print_confusion(out, r.confusion, d.class_attribute());
}

inline void cmd_train(const std::string& path, const std::string& model_path, const DataOptions& data,
                      const ForestOptions& forest, std::ostream& out) {
  const Dataset d = load_dataset(path, data);
  const ForestModel m = train_forest(d, forest.params(), forest.workers);
  std::ofstream file(model_path, std::ios::binary);
  if (!file) throw error("cannot write '" + model_path + "'");
  file << serialize_model(m);
  if (!file.flush()) throw error("failed writing '" + model_path + "'");
  out << "trained " << system_label(m.params) << " with " << m.trees.size() << " trees on " << d.size()
      << " instances, mtry " << *m.params.mtry;
  if (m.params.sample_size) {
    out << ", sample size";
    for (std::size_t c = 0; c < m.params.sample_size->size(); ++c) out << (c ? "," : " ") << (*m.params.sample_size)[c];
  }
  out << "\nmodel written to " << model_path << '\n';
}

inline void cmd_predict(const std::string& path, const std::string& model_path, const DataOptions& data,
                        std::ostream& out) {
  const ForestModel m = deserialize_model(read_file(model_path));
  DataOptions opts = data;
  if (opts.class_column.empty()) opts.class_column = m.class_attribute().name;
  const Dataset d = load_dataset(path, opts, true);
  check_schema(m, d);
  const auto& cls = m.class_attribute();
  std::vector<std::size_t> predicted;
  out << "row\tpredicted\tvotes\n";
  for (std::size_t r = 0; r < d.size(); ++r) {
    const Prediction p = predict(m, d.instance(r));
    predicted.push_back(p.label);
    out << r << '\t' << cls.domain[p.label] << '\t';
    for (std::size_t c = 0; c < p.votes.size(); ++c) out << (c ? "," : "") << cls.domain[c] << '=' << p.votes[c];
    out << '\n';
  }
  if (!d.labeled() || d.empty()) return;
  std::vector<std::size_t> truth(d.size());
  for (std::size_t r = 0; r < d.size(); ++r) truth[r] = d.class_of(r);
  const ConfusionMatrix cm = confusion(predicted, truth, cls.domain.size());
  out << '\n' << "CCR: " << format_fixed(100.0 * static_cast<double>(cm.correct()) / static_cast<double>(cm.total()), 1)
      << '\n';
  if (cm.classes() == 2 && cm.actual_total(0) > 0 && cm.actual_total(1) > 0) {
    const MetricsReport r = metrics(cm, class_distribution(d).minority_index());
    out << "TPR_ma: " << format_fixed(r.tpr_majority, 1) << '\n'
        << "TPR_mi: " << format_fixed(r.tpr_minority, 1) << '\n'
        << "TPR_avg: " << format_fixed(r.tpr_avg, 1) << '\n';
  }
  print_confusion(out, cm, cls);
}

// Returns false if any dataset failed; rows for the others are still written.
inline bool cmd_bench(const std::vector<std::string>& paths, const DataOptions& data, const ForestOptions& forest,
                      const std::vector<std::size_t>& tree_counts, std::size_t folds, bool stratified, Output output,
                      std::ostream& out, std::ostream& err) {
  const CvOptions cv{folds, forest.seed, stratified, forest.workers};
  const std::vector<System> systems{System::brf, System::rf};
  ForestParams base = forest.params();
  bool ok = true;
  if (output == Output::tsv) write_tsv_header(out);
  for (const auto& path : paths) {
    try {
      const std::vector<NamedDataset> one{{dataset_label(path), load_dataset(path, data)}};
      benchmark(one, tree_counts, systems, cv, base, [&](const BenchmarkRow& row) {
        if (output == Output::tsv) {
          write_tsv_row(out, row.dataset, row.report);
        } else {
          write_record(out, row.dataset, row.report);
        }
        out.flush();
      });
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      ok = false;
    }
  }
  return ok;
}

// --- entry point ----------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Random forests with per-class balanced bootstrap for imbalanced two-class data", "brf"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every command");

  DataOptions data;
  ForestOptions forest;
  Output output = Output::text;
  std::size_t folds = 10;
  bool unstratified = false;
  std::string path, model_path;
  std::vector<std::string> paths;
  std::vector<std::size_t> tree_counts{20, 100, 2000};

  auto* info = app.add_subcommand("info", "Summarize a dataset: instances, attributes, class distribution");
  info->add_option("file", path, "ARFF or CSV file")->required();
  add_data_options(*info, data);

  auto* train = app.add_subcommand("train", "Train a forest and write the model file");
  train->add_option("file", path, "Training data")->required();
  train->add_option("--model", model_path, "Output model path")->required();
  add_data_options(*train, data);
  add_forest_options(*train, forest, true);

  auto* pred = app.add_subcommand("predict", "Predict with a trained model");
  pred->add_option("file", path, "Data to predict; class values may be '?'")->required();
  pred->add_option("--model", model_path, "Model file written by train")->required();
  add_data_options(*pred, data);

  auto* cv = app.add_subcommand("cv", "Cross-validate one configuration");
  cv->add_option("file", path, "Dataset")->required();
  add_data_options(*cv, data);
  add_forest_options(*cv, forest, true);
  cv->add_option("--folds", folds, "Number of folds")->check(CLI::Range(2, 1000000))->capture_default_str();
  cv->add_flag("--unstratified", unstratified, "Plain random folds instead of stratified ones");
  add_output_option(*cv, output);

  auto* bench = app.add_subcommand("bench", "Cross-validate RF and BRF over datasets and tree counts");
  bench->add_option("files", paths, "Datasets")->required();
  add_data_options(*bench, data);
  add_forest_options(*bench, forest, false);
  bench->add_option("--trees", tree_counts, "Tree counts")
      ->delimiter(',')
      ->check(CLI::PositiveNumber)
      ->default_str("20,100,2000");
  bench->add_option("--folds", folds, "Number of folds")->check(CLI::Range(2, 1000000))->capture_default_str();
  bench->add_flag("--unstratified", unstratified, "Plain random folds instead of stratified ones");
  add_output_option(*bench, output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (info->parsed()) {
      cmd_info(path, data, out);
    } else if (train->parsed()) {
      cmd_train(path, model_path, data, forest, out);
    } else if (pred->parsed()) {
      cmd_predict(path, model_path, data, out);
    } else if (cv->parsed()) {
      cmd_cv(path, data, forest, folds, !unstratified, output, out);
    } else if (bench->parsed()) {
      if (!cmd_bench(paths, data, forest, tree_counts, folds, !unstratified, output, out, err)) return 1;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"brf"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace brf::cli
