#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "freightbench/learner.hpp"

namespace freightbench {

// Weighted per-feature affine transform to mean 0 / variance 1. Constant
// features get scale 1 so the transform stays invertible.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& weights);
  Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
};

// --- multinomial logit -------------------------------------------------------

// Coefficients live in standardized feature space, one row per class with the
// intercept in the last column; class 0 is the zero reference row.
class MnlModel final : public Model {
 public:
  MnlModel(Eigen::MatrixXd coefficients, Standardizer standardizer,
           std::array<bool, kNumModes> class_present, std::uint64_t seed,
           Eigen::Index train_samples, bool converged, int iterations,
           std::vector<double> loss_history);

  const Eigen::MatrixXd& coefficients() const { return coefficients_; }
  const Standardizer& standardizer() const { return standardizer_; }
  bool converged() const { return converged_; }
  int iterations() const { return iterations_; }
  const std::vector<double>& loss_history() const { return loss_history_; }

  std::string params_json() const override;

 protected:
  Eigen::MatrixXd predict_proba_impl(const Eigen::MatrixXd& X) const override;

 private:
  Eigen::MatrixXd coefficients_;  // 5 x (D+1)
  Standardizer standardizer_;
  bool converged_;
  int iterations_;
  std::vector<double> loss_history_;
};

std::shared_ptr<MnlModel> fit_mnl(const EncodedDataset& data, const MnlConfig& config,
                                  std::uint64_t seed);

// Weighted multinomial cross-entropy over the free (non-reference) rows.
// coef_free is 4 x (D+1); x_aug carries the bias column. Exposed so the
// analytic gradient can be checked against finite differences.
double mnl_loss_and_gradient(const Eigen::MatrixXd& coef_free, const Eigen::MatrixXd& x_aug,
                             const std::vector<int>& labels, const Eigen::VectorXd& norm_weights,
                             Eigen::MatrixXd* gradient);

// --- Gaussian naive Bayes ----------------------------------------------------

class GaussianNbModel final : public Model {
 public:
  GaussianNbModel(std::array<double, kNumModes> priors, Eigen::MatrixXd means,
                  Eigen::MatrixXd variances, double epsilon,
                  std::array<bool, kNumModes> class_present, std::uint64_t seed,
                  Eigen::Index train_samples);

  const std::array<double, kNumModes>& priors() const { return priors_; }
  const Eigen::MatrixXd& means() const { return means_; }
  const Eigen::MatrixXd& variances() const { return variances_; }  // epsilon included
  double epsilon() const { return epsilon_; }

  std::string params_json() const override;

 protected:
  Eigen::MatrixXd predict_proba_impl(const Eigen::MatrixXd& X) const override;

 private:
  std::array<double, kNumModes> priors_;
  Eigen::MatrixXd means_;      // 5 x D (absent classes zero)
  Eigen::MatrixXd variances_;  // 5 x D
  double epsilon_;
};

std::shared_ptr<GaussianNbModel> fit_gaussian_nb(const EncodedDataset& data,
                                                 const NbConfig& config, std::uint64_t seed);

// --- k-nearest neighbors -----------------------------------------------------

// Lazy learner: keeps the training rows (canonical order) and answers queries
// with a weighted majority vote over the k nearest rows by Euclidean distance.
// Distance ties admit the lower stored index.
class KnnModel final : public Model {
 public:
  KnnModel(Eigen::MatrixXd train_features, std::vector<int> train_labels,
           Eigen::VectorXd train_weights, int k, std::array<bool, kNumModes> class_present,
           std::uint64_t seed);

  int k() const { return k_; }
  const Eigen::MatrixXd& train_features() const { return train_features_; }

  std::string params_json() const override;

 protected:
  Eigen::MatrixXd predict_proba_impl(const Eigen::MatrixXd& X) const override;

 private:
  Eigen::MatrixXd train_features_;
  std::vector<int> train_labels_;
  Eigen::VectorXd train_weights_;
  int k_;
};

std::shared_ptr<KnnModel> fit_knn(const EncodedDataset& data, const KnnConfig& config,
                                  std::uint64_t seed);

// --- one-vs-rest linear SVM --------------------------------------------------

// Five hinge+L2 problems in standardized space; weight vectors carry the bias
// in the last column. Probabilities are a softmax over decision values — a
// reporting convenience only, never used for the accuracy comparisons.
class LinearSvmModel final : public Model {
 public:
  LinearSvmModel(Eigen::MatrixXd weights, Standardizer standardizer, double c,
                 std::array<bool, kNumModes> class_present, std::uint64_t seed,
                 Eigen::Index train_samples);

  const Eigen::MatrixXd& ovr_weights() const { return weights_; }  // 5 x (D+1)
  Eigen::MatrixXd decision_values(const Eigen::MatrixXd& X) const;

  std::string params_json() const override;

 protected:
  Eigen::MatrixXd predict_proba_impl(const Eigen::MatrixXd& X) const override;

 private:
  Eigen::MatrixXd weights_;
  Standardizer standardizer_;
  double c_;
};

std::shared_ptr<LinearSvmModel> fit_linear_svm(const EncodedDataset& data,
                                               const SvmConfig& config, std::uint64_t seed);

// Hinge+L2 objective for one one-vs-rest problem; signs are +-1 labels.
// Differentiable wherever no margin sits exactly at 1.
double svm_objective_and_gradient(const Eigen::VectorXd& weights_with_bias,
                                  const Eigen::MatrixXd& x_aug,
                                  const Eigen::VectorXd& signs,
                                  const Eigen::VectorXd& norm_weights, double c,
                                  Eigen::VectorXd* gradient);

// --- single-hidden-layer MLP -------------------------------------------------

struct MlpParameters {
  Eigen::MatrixXd w1;  // D x H
  Eigen::RowVectorXd b1;
  Eigen::MatrixXd w2;  // H x 5
  Eigen::RowVectorXd b2;
};

class MlpModel final : public Model {
 public:
  MlpModel(MlpParameters params, Standardizer standardizer,
           std::array<bool, kNumModes> class_present, std::uint64_t seed,
           Eigen::Index train_samples);

  const MlpParameters& parameters() const { return params_; }

  std::string params_json() const override;

 protected:
  Eigen::MatrixXd predict_proba_impl(const Eigen::MatrixXd& X) const override;

 private:
  MlpParameters params_;
  Standardizer standardizer_;
};

std::shared_ptr<MlpModel> fit_mlp(const EncodedDataset& data, const MlpConfig& config,
                                  std::uint64_t seed);

// Weighted cross-entropy over one batch (rows of x, already standardized),
// with gradients for every parameter. Backprop correctness is checked against
// central finite differences of this loss.
double mlp_loss_and_gradient(const MlpParameters& params, const Eigen::MatrixXd& x,
                             const std::vector<int>& labels, const Eigen::VectorXd& weights,
                             MlpParameters* gradient);

}  // namespace freightbench
