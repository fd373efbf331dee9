#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "freightbench/learner.hpp"
#include "freightbench/rng.hpp"

namespace freightbench {

// Flat tree storage; feature < 0 marks a leaf. Internal nodes route
// x[feature] <= threshold to the left child.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::array<double, kNumModes> counts{};  // leaf: weighted class counts
};

struct ClassificationTree {
  std::vector<TreeNode> nodes;            // root at index 0
  std::vector<double> importance_raw;     // per-feature accumulated weighted Gini decrease

  const TreeNode& leaf_for(const Eigen::RowVectorXd& x) const;
  Eigen::RowVectorXd leaf_probability(const Eigen::RowVectorXd& x) const;
  int depth() const;
  int internal_node_count() const;
};

struct RegressionTreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf payload
};

struct RegressionTree {
  std::vector<RegressionTreeNode> nodes;
  std::vector<double> importance_raw;  // per-feature accumulated squared-error decrease

  double value_for(const Eigen::RowVectorXd& x) const;
};

struct SplitCandidate {
  int feature = 0;
  double threshold = 0.0;
  double gini_decrease = 0.0;  // weighted impurity decrease, > 0 for accepted splits
};

// Best weighted-Gini split over the given rows and candidate features.
// Thresholds are midpoints 0.5*(a+b) between consecutive distinct sorted
// values (falling back to the lower value if rounding collapses the midpoint).
// Ties resolve to the lowest feature index, then the smallest threshold.
// Returns nothing for pure or unsplittable nodes.
std::optional<SplitCandidate> best_split(const Eigen::MatrixXd& X,
                                         const std::vector<int>& rows,
                                         const std::vector<int>& candidate_features,
                                         const std::vector<int>& labels,
                                         const Eigen::VectorXd& weights);

// Greedy growth controls shared by single trees and ensemble members.
struct TreeGrowth {
  int max_depth = -1;  // < 0 unlimited
  int min_samples_split = 2;
  int mtry = 0;  // 0 => all features; otherwise features drawn per node from rng
  Rng* rng = nullptr;
};

// instance_rows maps tree instances to rows of X (bootstrap resamples repeat
// rows); instance_weights pairs with it.
ClassificationTree grow_classification_tree(const Eigen::MatrixXd& X,
                                            const std::vector<int>& instance_rows,
                                            const std::vector<int>& labels,
                                            const Eigen::VectorXd& instance_weights,
                                            const TreeGrowth& growth);

// Squared-error splits on per-instance targets; leaves carry the Newton step
// scale * sum(w * target) / sum(w * hessian) used by multinomial boosting.
// leaf_of_instance, when given, receives each instance's final leaf index.
RegressionTree grow_regression_tree(const Eigen::MatrixXd& X,
                                    const std::vector<int>& instance_rows,
                                    const Eigen::VectorXd& targets,
                                    const Eigen::VectorXd& hessians,
                                    const Eigen::VectorXd& instance_weights,
                                    const TreeGrowth& growth, double leaf_scale,
                                    std::vector<int>* leaf_of_instance);

// --- CART model ---------------------------------------------------------------

class CartModel final : public Model {
 public:
  CartModel(ClassificationTree tree, CartConfig config,
            std::array<bool, kNumModes> class_present, std::uint64_t seed,
            Eigen::Index train_samples, Eigen::Index feature_count);

  const ClassificationTree& tree() const { return tree_; }
  const CartConfig& config() const { return config_; }

  std::string params_json() const override;

 protected:
  Eigen::MatrixXd predict_proba_impl(const Eigen::MatrixXd& X) const override;

 private:
  ClassificationTree tree_;
  CartConfig config_;
};

std::shared_ptr<CartModel> fit_cart(const EncodedDataset& data, const CartConfig& config,
                                    std::uint64_t seed);

}  // namespace freightbench
