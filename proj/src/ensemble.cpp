#include "freightbench/ensemble.hpp"

#include <cmath>
#include <json.hpp>
#include <numeric>

#include "freightbench/errors.hpp"

namespace freightbench {
namespace {

using nlohmann::json;

// Raw score standing in for log(0) on classes with no training weight.
constexpr double kAbsentScore = -700.0;

std::vector<int> identity_instances(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// N index draws with replacement, probability proportional to sample weight.
std::vector<int> weighted_bootstrap(const Eigen::VectorXd& weights, Rng& rng) {
  std::vector<double> cdf(static_cast<std::size_t>(weights.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  std::vector<int> draws(static_cast<std::size_t>(weights.size()));
  for (auto& d : draws) d = static_cast<int>(rng.weighted_index(cdf));
  return draws;
}

std::vector<ClassificationTree> fit_tree_ensemble(const EncodedDataset& data, int n_trees,
                                                  int mtry, bool bootstrap,
                                                  const CartConfig& tree_config,
                                                  std::uint64_t seed) {
  const EncodedDataset d = data.subset(canonical_row_order(data));
  const int n = static_cast<int>(d.size());
  std::vector<ClassificationTree> trees;
  trees.reserve(static_cast<std::size_t>(n_trees));
  for (int t = 0; t < n_trees; ++t) {
    Rng rng(derive_seed(seed, {0x54524545u, static_cast<std::uint64_t>(t)}));
    TreeGrowth growth;
    growth.max_depth = tree_config.max_depth;
    growth.min_samples_split = tree_config.min_samples_split;
    growth.mtry = mtry >= static_cast<int>(d.feature_count()) ? 0 : mtry;
    growth.rng = &rng;
    if (bootstrap) {
      // resampled instances already represent the weighted distribution
      const std::vector<int> instances = weighted_bootstrap(d.weights, rng);
      const Eigen::VectorXd unit = Eigen::VectorXd::Ones(n);
      trees.push_back(grow_classification_tree(d.features, instances, d.labels, unit, growth));
    } else {
      trees.push_back(grow_classification_tree(d.features, identity_instances(n), d.labels,
                                               d.weights, growth));
    }
  }
  return trees;
}

}  // namespace

ForestModel::ForestModel(Family family, std::vector<ClassificationTree> trees, int mtry,
                         bool bootstrap, CartConfig tree_config,
                         std::array<bool, kNumModes> class_present, std::uint64_t seed,
                         Eigen::Index train_samples, Eigen::Index feature_count)
    : Model(family, feature_count, seed, train_samples, class_present),
      trees_(std::move(trees)),
      mtry_(mtry),
      bootstrap_(bootstrap),
      tree_config_(tree_config) {}

Eigen::MatrixXd ForestModel::predict_proba_impl(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd proba = Eigen::MatrixXd::Zero(X.rows(), kNumModes);
  for (const ClassificationTree& tree : trees_)
    for (Eigen::Index i = 0; i < X.rows(); ++i) proba.row(i) += tree.leaf_probability(X.row(i));
  proba /= static_cast<double>(trees_.size());
  mask_absent_classes(proba);
  return proba;
}

namespace {

json classification_tree_to_json(const ClassificationTree& tree) {
  json nodes = json::array();
  for (const TreeNode& nd : tree.nodes) {
    if (nd.feature < 0)
      nodes.push_back(json{{"counts", nd.counts}});
    else
      nodes.push_back(
          json{{"f", nd.feature}, {"t", nd.threshold}, {"l", nd.left}, {"r", nd.right}});
  }
  return json{{"nodes", std::move(nodes)}, {"importance_raw", tree.importance_raw}};
}

json regression_tree_to_json(const RegressionTree& tree) {
  json nodes = json::array();
  for (const RegressionTreeNode& nd : tree.nodes) {
    if (nd.feature < 0)
      nodes.push_back(json{{"v", nd.value}});
    else
      nodes.push_back(
          json{{"f", nd.feature}, {"t", nd.threshold}, {"l", nd.left}, {"r", nd.right}});
  }
  return json{{"nodes", std::move(nodes)}, {"importance_raw", tree.importance_raw}};
}

}  // namespace

std::string ForestModel::params_json() const {
  json j;
  json trees = json::array();
  for (const ClassificationTree& tree : trees_) trees.push_back(classification_tree_to_json(tree));
  j["trees"] = std::move(trees);
  j["mtry"] = mtry_;
  j["bootstrap"] = bootstrap_;
  j["max_depth"] = tree_config_.max_depth;
  j["min_samples_split"] = tree_config_.min_samples_split;
  return j.dump();
}

std::shared_ptr<ForestModel> fit_random_forest(const EncodedDataset& data,
                                               const ForestConfig& config, std::uint64_t seed) {
  data.validate();
  if (config.mtry > data.feature_count())
    throw ValidationError("rf: mtry=" + std::to_string(config.mtry) +
                          " exceeds feature count " + std::to_string(data.feature_count()));
  auto trees = fit_tree_ensemble(data, config.n_trees, config.mtry, config.bootstrap,
                                 config.tree, seed);
  return std::make_shared<ForestModel>(Family::kRf, std::move(trees), config.mtry,
                                       config.bootstrap, config.tree,
                                       classes_present(data.labels), seed, data.size(),
                                       data.feature_count());
}

std::shared_ptr<ForestModel> fit_bagging(const EncodedDataset& data, const BaggingConfig& config,
                                         std::uint64_t seed) {
  data.validate();
  const int all_features = static_cast<int>(data.feature_count());
  auto trees = fit_tree_ensemble(data, config.n_estimators, all_features, config.bootstrap,
                                 config.tree, seed);
  return std::make_shared<ForestModel>(Family::kBag, std::move(trees), all_features,
                                       config.bootstrap, config.tree,
                                       classes_present(data.labels), seed, data.size(),
                                       data.feature_count());
}

// --- gradient boosting ---------------------------------------------------------

BoostedModel::BoostedModel(std::array<double, kNumModes> initial_scores,
                           std::vector<std::array<RegressionTree, kNumModes>> stages,
                           BoostConfig config, std::array<bool, kNumModes> class_present,
                           std::uint64_t seed, Eigen::Index train_samples,
                           Eigen::Index feature_count)
    : Model(Family::kBoost, feature_count, seed, train_samples, class_present),
      initial_scores_(initial_scores),
      stages_(std::move(stages)),
      config_(config) {}

Eigen::MatrixXd BoostedModel::raw_scores(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd scores(X.rows(), kNumModes);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (int c = 0; c < kNumModes; ++c) scores(i, c) = initial_scores_[static_cast<std::size_t>(c)];
  for (const auto& stage : stages_)
    for (int c = 0; c < kNumModes; ++c)
      for (Eigen::Index i = 0; i < X.rows(); ++i)
        scores(i, c) += config_.learning_rate * stage[static_cast<std::size_t>(c)].value_for(X.row(i));
  return scores;
}

Eigen::MatrixXd BoostedModel::predict_proba_impl(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd scores = raw_scores(X);
  softmax_rows(scores);
  mask_absent_classes(scores);
  return scores;
}

std::string BoostedModel::params_json() const {
  json j;
  j["initial_scores"] = initial_scores_;
  json stages = json::array();
  for (const auto& stage : stages_) {
    json class_trees = json::array();
    for (const RegressionTree& tree : stage) class_trees.push_back(regression_tree_to_json(tree));
    stages.push_back(std::move(class_trees));
  }
  j["stages"] = std::move(stages);
  j["learning_rate"] = config_.learning_rate;
  j["max_depth"] = config_.max_depth;
  j["min_samples_split"] = config_.min_samples_split;
  return j.dump();
}

Eigen::RowVectorXd boosting_pseudo_residual(const Eigen::RowVectorXd& raw_scores, int label) {
  Eigen::RowVectorXd p = raw_scores;
  const double m = p.maxCoeff();
  p = (p.array() - m).exp();
  p /= p.sum();
  Eigen::RowVectorXd r = -p;
  r[label] += 1.0;
  return r;
}

std::shared_ptr<BoostedModel> fit_gradient_boosting(const EncodedDataset& data,
                                                    const BoostConfig& config,
                                                    std::uint64_t seed) {
  data.validate();
  const auto present = classes_present(data.labels);
  int n_present = 0;
  for (bool p : present) n_present += p ? 1 : 0;
  if (n_present < 2)
    throw ValidationError("boost: need at least two classes in the training data");

  const EncodedDataset d = data.subset(canonical_row_order(data));
  const int n = static_cast<int>(d.size());
  const auto priors = weighted_class_shares(d.labels, d.weights);

  std::array<double, kNumModes> init{};
  for (int c = 0; c < kNumModes; ++c)
    init[static_cast<std::size_t>(c)] =
        priors[static_cast<std::size_t>(c)] > 0.0 ? std::log(priors[static_cast<std::size_t>(c)])
                                                  : kAbsentScore;

  Eigen::MatrixXd scores(n, kNumModes);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < kNumModes; ++c) scores(i, c) = init[static_cast<std::size_t>(c)];

  const std::vector<int> instances = identity_instances(n);
  TreeGrowth growth;
  growth.max_depth = config.max_depth;
  growth.min_samples_split = config.min_samples_split;
  // gradient of the multinomial deviance needs the (K-1)/K Newton damping
  const double leaf_scale =
      static_cast<double>(kNumModes - 1) / static_cast<double>(kNumModes);

  std::vector<std::array<RegressionTree, kNumModes>> stages;
  stages.reserve(static_cast<std::size_t>(config.n_stages));
  Eigen::VectorXd targets(n), hessians(n);
  std::vector<int> leaf_of;
  for (int stage = 0; stage < config.n_stages; ++stage) {
    Eigen::MatrixXd proba = scores;
    softmax_rows(proba);
    std::array<RegressionTree, kNumModes> stage_trees;
    for (int c = 0; c < kNumModes; ++c) {
      for (int i = 0; i < n; ++i) {
        const double p = proba(i, c);
        targets[i] = (d.labels[static_cast<std::size_t>(i)] == c ? 1.0 : 0.0) - p;
        hessians[i] = p * (1.0 - p);
      }
      stage_trees[static_cast<std::size_t>(c)] = grow_regression_tree(
          d.features, instances, targets, hessians, d.weights, growth, leaf_scale, &leaf_of);
      const RegressionTree& tree = stage_trees[static_cast<std::size_t>(c)];
      for (int i = 0; i < n; ++i)
        scores(i, c) += config.learning_rate *
                        tree.nodes[static_cast<std::size_t>(leaf_of[static_cast<std::size_t>(i)])].value;
    }
    if (!scores.allFinite())
      throw NumericalError("boost: non-finite scores at stage " + std::to_string(stage));
    stages.push_back(std::move(stage_trees));
  }
  return std::make_shared<BoostedModel>(init, std::move(stages), config, present, seed, d.size(),
                                        d.feature_count());
}

// --- impurity importance --------------------------------------------------------

Eigen::VectorXd impurity_importance(const Model& model) {
  const Eigen::Index d = model.feature_count();
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(d);
  if (const auto* cart = dynamic_cast<const CartModel*>(&model)) {
    for (Eigen::Index f = 0; f < d; ++f)
      raw[f] = cart->tree().importance_raw[static_cast<std::size_t>(f)];
  } else if (const auto* forest = dynamic_cast<const ForestModel*>(&model)) {
    for (const ClassificationTree& tree : forest->trees())
      for (Eigen::Index f = 0; f < d; ++f)
        raw[f] += tree.importance_raw[static_cast<std::size_t>(f)];
  } else if (const auto* boosted = dynamic_cast<const BoostedModel*>(&model)) {
    for (const auto& stage : boosted->stages())
      for (const RegressionTree& tree : stage)
        for (Eigen::Index f = 0; f < d; ++f)
          raw[f] += tree.importance_raw[static_cast<std::size_t>(f)];
  } else {
    throw ModelTypeError("impurity importance requires a tree-family model, got '" +
                         family_name(model.family()) + "'");
  }
  const double total = raw.sum();
  if (!(total > 0.0)) return Eigen::VectorXd::Constant(d, 1.0 / static_cast<double>(d));
  return raw / total;
}

}  // namespace freightbench
