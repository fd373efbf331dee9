#include <fstream>
#include <json.hpp>
#include <sstream>

#include "freightbench/ensemble.hpp"
#include "freightbench/errors.hpp"
#include "freightbench/simple_learners.hpp"
#include "freightbench/tree.hpp"

namespace freightbench {
namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

Eigen::MatrixXd matrix_from_json(const json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw ValidationError("model file: matrix payload size mismatch");
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[k++];
  return m;
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<Eigen::Index>(data.size()));
}

Standardizer standardizer_from_json(const json& j) {
  Standardizer s;
  s.mean = vector_from_json(j.at("mean"));
  s.scale = vector_from_json(j.at("scale"));
  return s;
}

ClassificationTree classification_tree_from_json(const json& j) {
  ClassificationTree tree;
  for (const json& nj : j.at("nodes")) {
    TreeNode nd;
    if (nj.contains("counts")) {
      nj.at("counts").get_to(nd.counts);
    } else {
      nd.feature = nj.at("f").get<int>();
      nd.threshold = nj.at("t").get<double>();
      nd.left = nj.at("l").get<int>();
      nd.right = nj.at("r").get<int>();
    }
    tree.nodes.push_back(nd);
  }
  j.at("importance_raw").get_to(tree.importance_raw);
  return tree;
}

RegressionTree regression_tree_from_json(const json& j) {
  RegressionTree tree;
  for (const json& nj : j.at("nodes")) {
    RegressionTreeNode nd;
    if (nj.contains("v")) {
      nd.value = nj.at("v").get<double>();
    } else {
      nd.feature = nj.at("f").get<int>();
      nd.threshold = nj.at("t").get<double>();
      nd.left = nj.at("l").get<int>();
      nd.right = nj.at("r").get<int>();
    }
    tree.nodes.push_back(nd);
  }
  j.at("importance_raw").get_to(tree.importance_raw);
  return tree;
}

}  // namespace

std::string model_to_json(const Model& model) {
  json j;
  j["format"] = "freightbench-model";
  j["version"] = kFormatVersion;
  j["family"] = family_name(model.family());
  j["seed"] = model.seed();
  j["train_samples"] = model.train_samples();
  j["feature_count"] = model.feature_count();
  j["class_present"] = model.class_present();
  j["params"] = json::parse(model.params_json());
  return j.dump();
}

FittedModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model file: parse failure: ") + e.what());
  }
  if (j.value("format", "") != "freightbench-model")
    throw ValidationError("model file: not a freightbench model");
  if (j.at("version").get<int>() != kFormatVersion)
    throw ValidationError("model file: unsupported version " +
                          std::to_string(j.at("version").get<int>()));

  const Family family = family_from_name(j.at("family").get<std::string>());
  const auto seed = j.at("seed").get<std::uint64_t>();
  const auto train_samples = j.at("train_samples").get<Eigen::Index>();
  const auto feature_count = j.at("feature_count").get<Eigen::Index>();
  std::array<bool, kNumModes> present{};
  j.at("class_present").get_to(present);
  const json& p = j.at("params");

  switch (family) {
    case Family::kMnl:
      return std::make_shared<MnlModel>(matrix_from_json(p.at("coefficients")),
                                        standardizer_from_json(p.at("standardizer")), present,
                                        seed, train_samples, p.at("converged").get<bool>(),
                                        p.at("iterations").get<int>(), std::vector<double>{});
    case Family::kNb: {
      std::array<double, kNumModes> priors{};
      p.at("priors").get_to(priors);
      return std::make_shared<GaussianNbModel>(priors, matrix_from_json(p.at("means")),
                                               matrix_from_json(p.at("variances")),
                                               p.at("epsilon").get<double>(), present, seed,
                                               train_samples);
    }
    case Family::kSvm:
      return std::make_shared<LinearSvmModel>(matrix_from_json(p.at("weights")),
                                              standardizer_from_json(p.at("standardizer")),
                                              p.at("c").get<double>(), present, seed,
                                              train_samples);
    case Family::kAnn: {
      MlpParameters params;
      params.w1 = matrix_from_json(p.at("w1"));
      params.b1 = vector_from_json(p.at("b1")).transpose();
      params.w2 = matrix_from_json(p.at("w2"));
      params.b2 = vector_from_json(p.at("b2")).transpose();
      return std::make_shared<MlpModel>(std::move(params),
                                        standardizer_from_json(p.at("standardizer")), present,
                                        seed, train_samples);
    }
    case Family::kKnn: {
      auto labels = p.at("train_labels").get<std::vector<int>>();
      return std::make_shared<KnnModel>(matrix_from_json(p.at("train_features")),
                                        std::move(labels),
                                        vector_from_json(p.at("train_weights")),
                                        p.at("k").get<int>(), present, seed);
    }
    case Family::kCart: {
      CartConfig config;
      config.max_depth = p.at("max_depth").get<int>();
      config.min_samples_split = p.at("min_samples_split").get<int>();
      return std::make_shared<CartModel>(classification_tree_from_json(p.at("tree")), config,
                                         present, seed, train_samples, feature_count);
    }
    case Family::kRf:
    case Family::kBag: {
      std::vector<ClassificationTree> trees;
      for (const json& tj : p.at("trees")) trees.push_back(classification_tree_from_json(tj));
      CartConfig config;
      config.max_depth = p.at("max_depth").get<int>();
      config.min_samples_split = p.at("min_samples_split").get<int>();
      return std::make_shared<ForestModel>(family, std::move(trees), p.at("mtry").get<int>(),
                                           p.at("bootstrap").get<bool>(), config, present, seed,
                                           train_samples, feature_count);
    }
    case Family::kBoost: {
      std::array<double, kNumModes> init{};
      p.at("initial_scores").get_to(init);
      std::vector<std::array<RegressionTree, kNumModes>> stages;
      for (const json& sj : p.at("stages")) {
        std::array<RegressionTree, kNumModes> stage;
        int c = 0;
        for (const json& tj : sj) stage[static_cast<std::size_t>(c++)] = regression_tree_from_json(tj);
        stages.push_back(std::move(stage));
      }
      BoostConfig config;
      config.n_stages = static_cast<int>(stages.size());
      config.learning_rate = p.at("learning_rate").get<double>();
      config.max_depth = p.at("max_depth").get<int>();
      config.min_samples_split = p.at("min_samples_split").get<int>();
      return std::make_shared<BoostedModel>(init, std::move(stages), config, present, seed,
                                            train_samples, feature_count);
    }
  }
  throw ValidationError("model file: unknown family");
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write model file: " + path);
  out << model_to_json(model) << "\n";
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace freightbench
