#pragma once

#include <memory>
#include <vector>

#include "freightbench/tree.hpp"

namespace freightbench {

// Bootstrap-aggregated classification trees. Serves both the random forest
// (feature subsampling at each node) and plain bagging (all features); the
// family tag records which. Prediction averages the trees' leaf probability
// vectors, so it is invariant to tree order.
class ForestModel final : public Model {
 public:
  ForestModel(Family family, std::vector<ClassificationTree> trees, int mtry, bool bootstrap,
              CartConfig tree_config, std::array<bool, kNumModes> class_present,
              std::uint64_t seed, Eigen::Index train_samples, Eigen::Index feature_count);

  const std::vector<ClassificationTree>& trees() const { return trees_; }
  int mtry() const { return mtry_; }
  bool bootstrap() const { return bootstrap_; }

  std::string params_json() const override;

 protected:
  Eigen::MatrixXd predict_proba_impl(const Eigen::MatrixXd& X) const override;

 private:
  std::vector<ClassificationTree> trees_;
  int mtry_;
  bool bootstrap_;
  CartConfig tree_config_;
};

std::shared_ptr<ForestModel> fit_random_forest(const EncodedDataset& data,
                                               const ForestConfig& config, std::uint64_t seed);
std::shared_ptr<ForestModel> fit_bagging(const EncodedDataset& data,
                                         const BaggingConfig& config, std::uint64_t seed);

// Gradient boosting on the multinomial deviance: raw scores start at the log
// weighted class priors; every stage fits one regression tree per class to
// the pseudo-residuals onehot(y) - softmax(F) and takes a damped Newton step.
class BoostedModel final : public Model {
 public:
  BoostedModel(std::array<double, kNumModes> initial_scores,
               std::vector<std::array<RegressionTree, kNumModes>> stages, BoostConfig config,
               std::array<bool, kNumModes> class_present, std::uint64_t seed,
               Eigen::Index train_samples, Eigen::Index feature_count);

  const std::array<double, kNumModes>& initial_scores() const { return initial_scores_; }
  const std::vector<std::array<RegressionTree, kNumModes>>& stages() const { return stages_; }
  double learning_rate() const { return config_.learning_rate; }

  Eigen::MatrixXd raw_scores(const Eigen::MatrixXd& X) const;

  std::string params_json() const override;

 protected:
  Eigen::MatrixXd predict_proba_impl(const Eigen::MatrixXd& X) const override;

 private:
  std::array<double, kNumModes> initial_scores_;
  std::vector<std::array<RegressionTree, kNumModes>> stages_;
  BoostConfig config_;
};

std::shared_ptr<BoostedModel> fit_gradient_boosting(const EncodedDataset& data,
                                                    const BoostConfig& config,
                                                    std::uint64_t seed);

// Weighted pseudo-residual onehot(label) - softmax(scores) for one sample;
// exposed for the hand-checked single-stage oracle.
Eigen::RowVectorXd boosting_pseudo_residual(const Eigen::RowVectorXd& raw_scores, int label);

// Normalized per-feature impurity decrease totals (Gini for classification
// trees, squared error for boosting's regression trees), summed over every
// tree in the model. Sums to 1; a model with no internal splits reports the
// uniform vector. Throws ModelTypeError for non-tree families.
Eigen::VectorXd impurity_importance(const Model& model);

}  // namespace freightbench
