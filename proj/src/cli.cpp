#include "freightbench/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "freightbench/ensemble.hpp"
#include "freightbench/errors.hpp"
#include "freightbench/format.hpp"
#include "freightbench/rng.hpp"
#include "freightbench/schema.hpp"

namespace freightbench {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

SchemaRegistry load_registry(const RunConfig& config) {
  return config.registry_path.empty() ? SchemaRegistry::defaults()
                                      : SchemaRegistry::load(config.registry_path);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory " + dir + ": " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string cell_stem(const GridCellKey& key) {
  std::ostringstream os;
  os << family_name(key.family) << "_r" << format_double(key.ratio) << "_k" << key.fold_count
     << "_n" << key.sample_size;
  return os.str();
}

json metrics_to_json(const MetricsReport& m) {
  json j;
  j["accuracy"] = m.accuracy;
  json per_class = json::array();
  for (int c = 0; c < kNumModes; ++c) {
    const std::size_t ci = static_cast<std::size_t>(c);
    json row;
    row["mode"] = mode_class_names()[ci];
    row["support"] = m.support[ci];
    row["precision"] = m.precision[ci];
    row["precision_defined"] = m.precision_defined[ci];
    if (m.recall_defined[ci]) row["recall"] = m.recall[ci]; else row["recall"] = nullptr;
    if (m.f1_defined[ci]) row["f1"] = m.f1[ci]; else row["f1"] = nullptr;
    per_class.push_back(std::move(row));
  }
  j["per_class"] = std::move(per_class);
  std::vector<double> confusion;
  for (int t = 0; t < kNumModes; ++t)
    for (int p = 0; p < kNumModes; ++p) confusion.push_back(m.confusion.counts(t, p));
  j["confusion"] = std::move(confusion);
  return j;
}

// Deterministic results table; wall-clock timings go to timings.csv so rerun
// outputs stay byte-identical.
class ResultsWriter {
 public:
  ResultsWriter(const std::string& out_dir)
      : results_(out_dir + "/results.csv"), timings_(out_dir + "/timings.csv") {
    if (!results_) throw ValidationError("cannot write " + out_dir + "/results.csv");
    results_ << "family,ratio,fold_count,sample_size,status,error,cell_seed,"
             << "cv_mean_accuracy,cv_std_accuracy,test_accuracy";
    for (const char* metric : {"precision", "recall", "f1", "support"})
      for (const auto& mode : mode_class_names()) results_ << ',' << metric << '_' << mode;
    for (int t = 0; t < kNumModes; ++t)
      for (int p = 0; p < kNumModes; ++p) results_ << ",confusion_" << t << '_' << p;
    results_ << "\n";
    timings_ << "family,ratio,fold_count,sample_size,wall_seconds\n";
  }

  void append(const GridCellResult& r) {
    const auto& key = r.key;
    results_ << family_name(key.family) << ',' << format_double(key.ratio) << ','
             << key.fold_count << ',' << key.sample_size << ',' << (r.ok ? "ok" : "error") << ','
             << '"' << r.error << '"' << ',' << r.cell_seed << ',';
    if (r.ok) {
      results_ << format_double(r.cv.mean) << ',' << format_double(r.cv.stddev) << ','
               << format_double(r.test_metrics.accuracy);
      const auto& m = r.test_metrics;
      for (int c = 0; c < kNumModes; ++c)
        results_ << ',' << format_double(m.precision[static_cast<std::size_t>(c)]);
      for (int c = 0; c < kNumModes; ++c) {
        const std::size_t ci = static_cast<std::size_t>(c);
        results_ << ',' << (m.recall_defined[ci] ? format_double(m.recall[ci]) : "undefined");
      }
      for (int c = 0; c < kNumModes; ++c) {
        const std::size_t ci = static_cast<std::size_t>(c);
        results_ << ',' << (m.f1_defined[ci] ? format_double(m.f1[ci]) : "undefined");
      }
      for (int c = 0; c < kNumModes; ++c)
        results_ << ',' << format_double(m.support[static_cast<std::size_t>(c)]);
      for (int t = 0; t < kNumModes; ++t)
        for (int p = 0; p < kNumModes; ++p)
          results_ << ',' << format_double(m.confusion.counts(t, p));
    } else {
      results_ << ",,";
      for (int i = 0; i < 4 * kNumModes + kNumModes * kNumModes; ++i) results_ << ',';
    }
    results_ << "\n";
    timings_ << family_name(key.family) << ',' << format_double(key.ratio) << ','
             << key.fold_count << ',' << key.sample_size << ','
             << format_double(r.wall_seconds) << "\n";
  }

 private:
  std::ofstream results_;
  std::ofstream timings_;
};

void write_cell_json(const std::string& dir, const GridCellResult& r) {
  json j;
  j["family"] = family_name(r.key.family);
  j["ratio"] = r.key.ratio;
  j["fold_count"] = r.key.fold_count;
  j["sample_size"] = r.key.sample_size;
  j["cell_seed"] = r.cell_seed;
  j["ok"] = r.ok;
  j["error"] = r.error;
  j["wall_seconds"] = r.wall_seconds;
  if (r.ok) {
    j["cv"] = {{"fold_accuracy", r.cv.fold_accuracy},
               {"mean", r.cv.mean},
               {"stddev", r.cv.stddev}};
    j["test_metrics"] = metrics_to_json(r.test_metrics);
  }
  std::ofstream out(dir + "/" + cell_stem(r.key) + ".json");
  if (!out) throw ValidationError("cannot write cell file in " + dir);
  out << j.dump(2) << "\n";
}

}  // namespace

EncodedDataset load_source_dataset(const RunConfig& config) {
  const SchemaRegistry registry = load_registry(config);
  const std::vector<ShipmentRecord> records =
      config.use_synthetic() ? generate_synthetic(config.synthetic)
                             : ingest_table_file(config.data_path, registry);
  return encode_dataset(records, BinningScheme{});
}

int cmd_generate(const RunConfig& config) {
  ensure_dir(config.output_dir);
  const SchemaRegistry registry = load_registry(config);
  const std::vector<ShipmentRecord> records = generate_synthetic(config.synthetic);
  const std::string data_path = config.output_dir + "/synthetic.csv";
  write_table_file(data_path, records, registry);
  registry.save(config.output_dir + "/registry.json");

  const EncodedDataset data = encode_dataset(records, BinningScheme{});
  const auto shares = weighted_mode_shares(data);
  std::cout << "wrote " << records.size() << " records to " << data_path << "\n";
  std::cout << "weighted mode shares:";
  for (int m = 0; m < kNumModes; ++m)
    std::cout << ' ' << mode_class_names()[static_cast<std::size_t>(m)] << '='
              << format_double(shares[static_cast<std::size_t>(m)]);
  std::cout << "\n";
  return 0;
}

int cmd_run(const RunConfig& config) {
  ensure_dir(config.output_dir);
  const std::string cells_dir = config.output_dir + "/cells";
  ensure_dir(cells_dir);

  const EncodedDataset data = load_source_dataset(config);

  ResultsWriter writer(config.output_dir);
  bool any_error = false;
  const std::vector<GridCellResult> results =
      run_experiment_grid(config.grid, data, [&](const GridCellResult& r) {
        writer.append(r);
        write_cell_json(cells_dir, r);
        if (!r.ok) any_error = true;
        std::cout << cell_stem(r.key) << ": "
                  << (r.ok ? "cv_mean=" + format_double(r.cv.mean) : "error: " + r.error)
                  << "\n";
      });

  // best cell per family, refitted on its training side and serialized
  std::vector<std::string> model_files;
  for (Family family : config.grid.families) {
    const GridCellResult* best = nullptr;
    for (const GridCellResult& r : results)
      if (r.ok && r.key.family == family &&
          (best == nullptr || r.test_metrics.accuracy > best->test_metrics.accuracy))
        best = &r;
    if (best == nullptr) continue;
    std::size_t n = static_cast<std::size_t>(data.size());
    EncodedDataset cell_data;
    if (best->key.sample_size == n) {
      cell_data = data;
    } else {
      Rng rng(derive_seed(best->cell_seed, {0}));
      cell_data = data.subset(rng.sample_without_replacement(n, best->key.sample_size));
    }
    const HoldoutSplit split =
        holdout_split(cell_data, best->key.ratio, derive_seed(best->cell_seed, {1}));
    LearnerSpec spec = LearnerSpec::defaults(family, derive_seed(best->cell_seed, {3}));
    const auto it = config.grid.hyperparameters.find(family);
    if (it != config.grid.hyperparameters.end()) spec.params = it->second;
    const FittedModel model = fit(spec, split.train);
    const std::string path =
        config.output_dir + "/model_" + family_name(family) + ".json";
    save_model(*model, path);
    model_files.push_back("model_" + family_name(family) + ".json");
  }

  // manifest ties results to the exact inputs
  json manifest;
  const std::string config_text = config_to_json_text(config);
  manifest["config"] = json::parse(config_text);
  manifest["config_hash"] = fnv1a_hash(config_text);
  manifest["master_seed"] = config.grid.master_seed;
  if (!config.data_path.empty())
    manifest["data_hash"] = fnv1a_hash(read_file(config.data_path));
  else
    manifest["data_hash"] = fnv1a_hash(config_to_json_text(config));  // synthetic: config is the input
  manifest["cells_total"] = results.size();
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.ok ? 0 : 1;
  manifest["cells_failed"] = failed;
  std::vector<std::string> artifacts = {"results.csv", "timings.csv", "manifest.json"};
  for (const auto& r : results) artifacts.push_back("cells/" + cell_stem(r.key) + ".json");
  for (const auto& f : model_files) artifacts.push_back(f);
  manifest["artifacts"] = artifacts;
  std::ofstream mf(config.output_dir + "/manifest.json");
  mf << manifest.dump(2) << "\n";

  std::cout << results.size() << " cells, " << failed << " failed\n";
  return any_error ? 1 : 0;
}

int cmd_fit(const RunConfig& config, const std::string& family_name_str) {
  ensure_dir(config.output_dir);
  const Family family = family_from_name(family_name_str);
  const EncodedDataset data = load_source_dataset(config);

  LearnerSpec spec = LearnerSpec::defaults(family, derive_seed(config.grid.master_seed, {7}));
  const auto it = config.grid.hyperparameters.find(family);
  if (it != config.grid.hyperparameters.end()) spec.params = it->second;

  const FittedModel model =
      config.grid.weights_in_fit
          ? fit(spec, data)
          : fit(spec, [&] { EncodedDataset d = data; d.weights.setOnes(); return d; }());
  const std::string model_path =
      config.output_dir + "/model_" + family_name(family) + ".json";
  save_model(*model, model_path);

  const MetricsReport train_metrics =
      compute_metrics(data.labels, model->predict(data.features), data.weights);
  json j;
  j["family"] = family_name(family);
  j["train_samples"] = data.size();
  j["training_metrics"] = metrics_to_json(train_metrics);
  std::ofstream out(config.output_dir + "/fit_" + family_name(family) + ".json");
  out << j.dump(2) << "\n";

  std::cout << "fitted " << family_name(family) << " on " << data.size()
            << " rows; training accuracy " << format_double(train_metrics.accuracy) << "\n"
            << "model written to " << model_path << "\n";
  return 0;
}

int cmd_importance(const RunConfig& config, const std::vector<std::string>& model_paths) {
  ensure_dir(config.output_dir);
  if (model_paths.empty()) throw ValidationError("importance: no model paths given");

  struct Ranked {
    std::string model_name;
    Eigen::VectorXd importance;
  };
  std::vector<Ranked> ranked;
  std::vector<std::string> feature_names = default_feature_names();

  for (const std::string& path : model_paths) {
    const FittedModel model = load_model(path);
    const Eigen::VectorXd imp = impurity_importance(*model);  // throws for non-tree models
    const std::string stem = fs::path(path).stem().string();
    ranked.push_back({stem, imp});

    std::vector<int> order(static_cast<std::size_t>(imp.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return imp[a] > imp[b]; });
    const std::string out_path = config.output_dir + "/importance_" + stem + ".csv";
    std::ofstream out(out_path);
    out << "rank,feature,importance\n";
    for (std::size_t i = 0; i < order.size(); ++i) {
      const int f = order[i];
      const std::string name = f < static_cast<int>(feature_names.size())
                                   ? feature_names[static_cast<std::size_t>(f)]
                                   : "feature_" + std::to_string(f);
      out << i + 1 << ',' << name << ',' << format_double(imp[f]) << "\n";
    }
    std::cout << "wrote " << out_path << "\n";
  }

  // merged comparison, one column per model
  std::ofstream merged(config.output_dir + "/importance_comparison.csv");
  merged << "feature";
  for (const Ranked& r : ranked) merged << ',' << r.model_name;
  merged << "\n";
  const Eigen::Index d = ranked.front().importance.size();
  for (Eigen::Index f = 0; f < d; ++f) {
    const std::string name = f < static_cast<Eigen::Index>(feature_names.size())
                                 ? feature_names[static_cast<std::size_t>(f)]
                                 : "feature_" + std::to_string(f);
    merged << name;
    for (const Ranked& r : ranked) merged << ',' << format_double(r.importance[f]);
    merged << "\n";
  }
  std::cout << "wrote " << config.output_dir << "/importance_comparison.csv\n";
  return 0;
}

int cmd_report(const RunConfig& config) {
  const std::string cells_dir = config.output_dir + "/cells";
  if (!fs::is_directory(cells_dir))
    throw ValidationError("report: no cells directory at " + cells_dir + "; run 'run' first");

  std::vector<json> cells;
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(cells_dir))
    if (entry.path().extension() == ".json") paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) cells.push_back(json::parse(read_file(p)));

  // box-plot-ready fold accuracies per (family, ratio, fold count)
  std::ofstream by_ratio(config.output_dir + "/report_by_ratio.csv");
  by_ratio << "family,ratio,fold_count,sample_size,fold_index,fold_accuracy\n";
  for (const json& c : cells) {
    if (!c.at("ok").get<bool>()) continue;
    const auto accs = c.at("cv").at("fold_accuracy").get<std::vector<double>>();
    for (std::size_t i = 0; i < accs.size(); ++i)
      by_ratio << c.at("family").get<std::string>() << ','
               << format_double(c.at("ratio").get<double>()) << ',' << c.at("fold_count") << ','
               << c.at("sample_size") << ',' << i << ',' << format_double(accs[i]) << "\n";
  }

  // test accuracy against sample size
  std::ofstream by_size(config.output_dir + "/report_by_size.csv");
  by_size << "family,ratio,fold_count,sample_size,test_accuracy\n";
  for (const json& c : cells) {
    if (!c.at("ok").get<bool>()) continue;
    by_size << c.at("family").get<std::string>() << ','
            << format_double(c.at("ratio").get<double>()) << ',' << c.at("fold_count") << ','
            << c.at("sample_size") << ','
            << format_double(c.at("test_metrics").at("accuracy").get<double>()) << "\n";
  }

  // per-mode precision/recall/F1
  std::ofstream per_mode(config.output_dir + "/report_per_mode.csv");
  per_mode << "family,ratio,fold_count,sample_size,mode,precision,recall,f1,support\n";
  for (const json& c : cells) {
    if (!c.at("ok").get<bool>()) continue;
    for (const json& row : c.at("test_metrics").at("per_class")) {
      per_mode << c.at("family").get<std::string>() << ','
               << format_double(c.at("ratio").get<double>()) << ',' << c.at("fold_count") << ','
               << c.at("sample_size") << ',' << row.at("mode").get<std::string>() << ','
               << format_double(row.at("precision").get<double>()) << ',';
      if (row.at("recall").is_null()) per_mode << "undefined"; else
        per_mode << format_double(row.at("recall").get<double>());
      per_mode << ',';
      if (row.at("f1").is_null()) per_mode << "undefined"; else
        per_mode << format_double(row.at("f1").get<double>());
      per_mode << ',' << format_double(row.at("support").get<double>()) << "\n";
    }
  }

  std::cout << "wrote report_by_ratio.csv, report_by_size.csv, report_per_mode.csv under "
            << config.output_dir << "\n";
  return 0;
}

}  // namespace freightbench
