#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "freightbench/dataset.hpp"

namespace freightbench {

// The nine classifier families under comparison.
enum class Family { kMnl, kNb, kSvm, kAnn, kKnn, kCart, kRf, kBoost, kBag };

inline constexpr std::array<Family, 9> kAllFamilies = {
    Family::kMnl, Family::kNb, Family::kSvm,  Family::kAnn, Family::kKnn,
    Family::kCart, Family::kRf, Family::kBoost, Family::kBag};

const std::string& family_name(Family family);
Family family_from_name(const std::string& name);

// Per-family hyperparameters. The architecture-level values (tree counts,
// mtry, neighbor count, hidden width, stage count) follow the study design;
// optimizer constants are documented defaults, overridable per run.
struct MnlConfig {
  int max_iter = 1000;
  double tol = 1e-6;  // gradient max-norm stopping threshold
};

struct NbConfig {
  double var_smoothing = 1e-9;  // epsilon = var_smoothing * max feature variance
};

struct SvmConfig {
  double c = 1.0;
  int max_iter = 500;
  double learning_rate = 0.1;
};

struct MlpConfig {
  int hidden_units = 100;
  int epochs = 200;
  double learning_rate = 1e-3;
  int batch_size = 200;
};

struct KnnConfig {
  int k = 5;
};

struct CartConfig {
  int max_depth = -1;  // < 0 means unlimited
  int min_samples_split = 2;
};

struct ForestConfig {
  int n_trees = 10;
  int mtry = 2;
  bool bootstrap = true;
  CartConfig tree;  // unlimited depth by default
};

struct BaggingConfig {
  int n_estimators = 10;
  bool bootstrap = true;
  CartConfig tree;
};

struct BoostConfig {
  int n_stages = 100;  // one regression tree per class per stage
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_samples_split = 2;
};

using HyperParams = std::variant<MnlConfig, NbConfig, SvmConfig, MlpConfig, KnnConfig,
                                 CartConfig, ForestConfig, BaggingConfig, BoostConfig>;

// A classifier request: family, its hyperparameters and the seed every
// stochastic step derives from. No global random state anywhere.
struct LearnerSpec {
  Family family = Family::kCart;
  std::uint64_t seed = 0;
  HyperParams params;

  static LearnerSpec defaults(Family family, std::uint64_t seed = 0);
  void validate() const;  // throws ValidationError on bad hyperparameters
};

// Uniform trained-classifier contract. Immutable after fit; safe to share
// across threads. Class probabilities are row-stochastic; classes absent from
// the training data get probability zero.
class Model {
 public:
  virtual ~Model() = default;

  Family family() const { return family_; }
  Eigen::Index feature_count() const { return feature_count_; }
  static constexpr int class_count() { return kNumModes; }
  std::uint64_t seed() const { return seed_; }
  Eigen::Index train_samples() const { return train_samples_; }
  const std::array<bool, kNumModes>& class_present() const { return class_present_; }

  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const;
  std::vector<int> predict(const Eigen::MatrixXd& X) const;

  virtual std::string params_json() const = 0;  // family-specific parameter block

 protected:
  Model(Family family, Eigen::Index feature_count, std::uint64_t seed,
        Eigen::Index train_samples, const std::array<bool, kNumModes>& class_present)
      : family_(family),
        feature_count_(feature_count),
        seed_(seed),
        train_samples_(train_samples),
        class_present_(class_present) {}

  virtual Eigen::MatrixXd predict_proba_impl(const Eigen::MatrixXd& X) const = 0;

  // Zero out absent classes and renormalize each row.
  void mask_absent_classes(Eigen::MatrixXd& proba) const;

 private:
  Family family_;
  Eigen::Index feature_count_;
  std::uint64_t seed_;
  Eigen::Index train_samples_;
  std::array<bool, kNumModes> class_present_;
};

using FittedModel = std::shared_ptr<const Model>;

// Dispatch to the family's fit routine. Deterministic given (spec, data).
FittedModel fit(const LearnerSpec& spec, const EncodedDataset& data);

// Versioned JSON round-trip sufficient to reproduce predictions bit-exactly.
std::string model_to_json(const Model& model);
FittedModel model_from_json(const std::string& text);
void save_model(const Model& model, const std::string& path);
FittedModel load_model(const std::string& path);

// --- shared numeric helpers -------------------------------------------------

// Row argmax with ties resolved to the lowest class index.
int argmax_row(const Eigen::RowVectorXd& row);

// In-place numerically stable softmax of each row.
void softmax_rows(Eigen::MatrixXd& scores);

std::array<double, kNumModes> weighted_class_shares(const std::vector<int>& labels,
                                                    const Eigen::VectorXd& weights);

std::array<bool, kNumModes> classes_present(const std::vector<int>& labels);

}  // namespace freightbench
