#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "freightbench/cli.hpp"
#include "freightbench/errors.hpp"
#include "freightbench/run_config.hpp"
#include "freightbench/schema.hpp"

using namespace freightbench;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TempDir {
  fs::path path;
  TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("empty config file yields the documented defaults") {
  const RunConfig config = parse_config_text("");
  CHECK(config.grid.ratios == std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  CHECK(config.grid.fold_counts == std::vector<int>{10, 20, 30});
  CHECK(config.grid.families.size() == 9);
  CHECK(config.grid.sample_sizes ==
        std::vector<std::size_t>{136073, 226785, 453574, 907139, 1360706, 1814271, 2267842});

  const auto rf = std::get<ForestConfig>(config.grid.hyperparameters.at(Family::kRf));
  CHECK(rf.n_trees == 10);
  CHECK(rf.mtry == 2);
  CHECK(std::get<KnnConfig>(config.grid.hyperparameters.at(Family::kKnn)).k == 5);
  CHECK(std::get<BoostConfig>(config.grid.hyperparameters.at(Family::kBoost)).n_stages == 100);
  CHECK(std::get<BaggingConfig>(config.grid.hyperparameters.at(Family::kBag)).n_estimators == 10);
  CHECK(std::get<MlpConfig>(config.grid.hyperparameters.at(Family::kAnn)).hidden_units == 100);
}

TEST_CASE("config validation names the offending key") {
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"grid": {"ratios": [0.3, 1.5]}})"),
                       doctest::Contains("ratios"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"grid": {"fold_counts": [1]}})"),
                       doctest::Contains("fold_counts"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"grid": {"families": ["xgboost"]}})"),
                       doctest::Contains("families"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"mystery_key": 3})"),
                       doctest::Contains("mystery_key"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"hyperparameters": {"rf": {"trees": 10}}})"),
                       doctest::Contains("rf.trees"), ValidationError);
}

TEST_CASE("config round-trips through serialization") {
  const std::string text = R"({
    "grid": {"families": ["rf", "cart"], "ratios": [0.3], "fold_counts": [5],
             "sample_sizes": [1000]},
    "hyperparameters": {"rf": {"n_trees": 4, "mtry": 3}},
    "master_seed": 99,
    "workers": 2
  })";
  const RunConfig a = parse_config_text(text);
  const std::string serialized = config_to_json_text(a);
  const RunConfig b = parse_config_text(serialized);
  CHECK(config_to_json_text(b) == serialized);
  CHECK(b.grid.master_seed == 99);
  CHECK(std::get<ForestConfig>(b.grid.hyperparameters.at(Family::kRf)).n_trees == 4);
}

TEST_CASE("generate command writes a round-trippable table and registry") {
  TempDir dir("fb_generate_test");
  RunConfig config = default_run_config();
  config.synthetic.n_records = 120;
  config.synthetic.seed = 4;
  config.output_dir = (dir.path / "out").string();
  REQUIRE(cmd_generate(config) == 0);

  const SchemaRegistry registry =
      SchemaRegistry::load((dir.path / "out" / "registry.json").string());
  const auto records =
      ingest_table_file((dir.path / "out" / "synthetic.csv").string(), registry);
  CHECK(records.size() == 120);
}

TEST_CASE("run command writes deterministic artifacts") {
  TempDir dir("fb_run_test");
  RunConfig config = default_run_config();
  config.synthetic.n_records = 300;
  config.synthetic.seed = 6;
  config.grid.families = {Family::kNb, Family::kCart};
  config.grid.ratios = {0.3};
  config.grid.fold_counts = {3};
  config.grid.sample_sizes = {300};
  config.grid.master_seed = 17;

  config.output_dir = (dir.path / "a").string();
  REQUIRE(cmd_run(config) == 0);
  config.output_dir = (dir.path / "b").string();
  REQUIRE(cmd_run(config) == 0);

  const std::string results_a = read_file(dir.path / "a" / "results.csv");
  const std::string results_b = read_file(dir.path / "b" / "results.csv");
  CHECK(results_a == results_b);
  CHECK(results_a.find("nb,") != std::string::npos);
  CHECK(results_a.find("cart,") != std::string::npos);
  // header + 2 cells
  CHECK(std::count(results_a.begin(), results_a.end(), '\n') == 3);

  // every artifact named in the manifest exists and is non-empty
  const auto manifest = nlohmann::json::parse(read_file(dir.path / "a" / "manifest.json"));
  for (const auto& artifact : manifest.at("artifacts")) {
    const fs::path p = dir.path / "a" / artifact.get<std::string>();
    CAPTURE(p.string());
    CHECK(fs::exists(p));
    CHECK(fs::file_size(p) > 0);
  }

  SUBCASE("report derives plot-ready tables") {
    config.output_dir = (dir.path / "a").string();
    REQUIRE(cmd_report(config) == 0);
    const std::string by_ratio = read_file(dir.path / "a" / "report_by_ratio.csv");
    // 2 families x 3 folds of accuracies plus header
    CHECK(std::count(by_ratio.begin(), by_ratio.end(), '\n') == 7);
    CHECK(fs::exists(dir.path / "a" / "report_by_size.csv"));
    CHECK(fs::exists(dir.path / "a" / "report_per_mode.csv"));
  }

  SUBCASE("importance works on the serialized tree models and rejects others") {
    config.output_dir = (dir.path / "a").string();
    const std::string cart_model = (dir.path / "a" / "model_cart.json").string();
    REQUIRE(cmd_importance(config, {cart_model}) == 0);
    const std::string table = read_file(dir.path / "a" / "importance_model_cart.csv");
    CHECK(table.find("rank,feature,importance") != std::string::npos);
    CHECK(fs::exists(dir.path / "a" / "importance_comparison.csv"));

    // a non-tree model path is a type error
    const EncodedDataset data = load_source_dataset(config);
    const FittedModel nb = fit(LearnerSpec::defaults(Family::kNb, 1), data);
    const std::string nb_path = (dir.path / "nb.json").string();
    save_model(*nb, nb_path);
    CHECK_THROWS_AS(cmd_importance(config, {nb_path}), ModelTypeError);
  }
}

TEST_CASE("run command reports oversize sample cells with a nonzero exit") {
  TempDir dir("fb_run_oversize");
  RunConfig config = default_run_config();
  config.synthetic.n_records = 100;
  config.grid.families = {Family::kNb};
  config.grid.ratios = {0.3};
  config.grid.fold_counts = {2};
  config.grid.sample_sizes = {50, 1000};
  config.output_dir = (dir.path / "out").string();

  CHECK(cmd_run(config) == 1);
  const std::string results = read_file(dir.path / "out" / "results.csv");
  CHECK(results.find("error") != std::string::npos);
  CHECK(results.find("exceeds available rows") != std::string::npos);
}
