#include "freightbench/learner.hpp"

#include <algorithm>
#include <cmath>

#include "freightbench/ensemble.hpp"
#include "freightbench/errors.hpp"
#include "freightbench/simple_learners.hpp"
#include "freightbench/tree.hpp"

namespace freightbench {

const std::string& family_name(Family family) {
  static const std::array<std::string, 9> names = {"mnl", "nb",   "svm",   "ann", "knn",
                                                   "cart", "rf",  "boost", "bag"};
  return names[static_cast<std::size_t>(family)];
}

Family family_from_name(const std::string& name) {
  for (Family f : kAllFamilies)
    if (family_name(f) == name) return f;
  throw ValidationError("unknown classifier family '" + name + "'");
}

LearnerSpec LearnerSpec::defaults(Family family, std::uint64_t seed) {
  LearnerSpec spec;
  spec.family = family;
  spec.seed = seed;
  switch (family) {
    case Family::kMnl: spec.params = MnlConfig{}; break;
    case Family::kNb: spec.params = NbConfig{}; break;
    case Family::kSvm: spec.params = SvmConfig{}; break;
    case Family::kAnn: spec.params = MlpConfig{}; break;
    case Family::kKnn: spec.params = KnnConfig{}; break;
    case Family::kCart: spec.params = CartConfig{}; break;
    case Family::kRf: spec.params = ForestConfig{}; break;
    case Family::kBoost: spec.params = BoostConfig{}; break;
    case Family::kBag: spec.params = BaggingConfig{}; break;
  }
  return spec;
}

namespace {

struct SpecValidator {
  void operator()(const MnlConfig& c) const {
    if (c.max_iter < 1) throw ValidationError("mnl: max_iter must be >= 1");
    if (!(c.tol > 0.0)) throw ValidationError("mnl: tol must be positive");
  }
  void operator()(const NbConfig& c) const {
    if (!(c.var_smoothing > 0.0)) throw ValidationError("nb: var_smoothing must be positive");
  }
  void operator()(const SvmConfig& c) const {
    if (!(c.c > 0.0)) throw ValidationError("svm: C must be positive");
    if (c.max_iter < 1) throw ValidationError("svm: max_iter must be >= 1");
    if (!(c.learning_rate > 0.0)) throw ValidationError("svm: learning_rate must be positive");
  }
  void operator()(const MlpConfig& c) const {
    if (c.hidden_units < 1) throw ValidationError("ann: hidden_units must be >= 1");
    if (c.epochs < 1) throw ValidationError("ann: epochs must be >= 1");
    if (!(c.learning_rate > 0.0)) throw ValidationError("ann: learning_rate must be positive");
    if (c.batch_size < 1) throw ValidationError("ann: batch_size must be >= 1");
  }
  void operator()(const KnnConfig& c) const {
    if (c.k < 1) throw ValidationError("knn: k must be >= 1");
  }
  void operator()(const CartConfig& c) const {
    if (c.min_samples_split < 2) throw ValidationError("cart: min_samples_split must be >= 2");
  }
  void operator()(const ForestConfig& c) const {
    if (c.n_trees < 1) throw ValidationError("rf: n_trees must be >= 1");
    if (c.mtry < 1) throw ValidationError("rf: mtry must be >= 1");
    (*this)(c.tree);
  }
  void operator()(const BaggingConfig& c) const {
    if (c.n_estimators < 1) throw ValidationError("bag: n_estimators must be >= 1");
    (*this)(c.tree);
  }
  void operator()(const BoostConfig& c) const {
    if (c.n_stages < 0) throw ValidationError("boost: n_stages must be >= 0");
    if (!(c.learning_rate > 0.0)) throw ValidationError("boost: learning_rate must be positive");
    if (c.min_samples_split < 2) throw ValidationError("boost: min_samples_split must be >= 2");
  }
};

// The variant alternative must match the family tag.
constexpr std::size_t expected_index(Family family) {
  switch (family) {
    case Family::kMnl: return 0;
    case Family::kNb: return 1;
    case Family::kSvm: return 2;
    case Family::kAnn: return 3;
    case Family::kKnn: return 4;
    case Family::kCart: return 5;
    case Family::kRf: return 6;
    case Family::kBoost: return 8;
    case Family::kBag: return 7;
  }
  return 0;
}

}  // namespace

void LearnerSpec::validate() const {
  if (params.index() != expected_index(family))
    throw ValidationError("hyperparameters do not match family '" + family_name(family) + "'");
  std::visit(SpecValidator{}, params);
}

int argmax_row(const Eigen::RowVectorXd& row) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(row.size()); ++c)
    if (row[c] > row[best]) best = c;
  return best;
}

void softmax_rows(Eigen::MatrixXd& scores) {
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double m = scores.row(i).maxCoeff();
    scores.row(i) = (scores.row(i).array() - m).exp();
    scores.row(i) /= scores.row(i).sum();
  }
}

std::array<double, kNumModes> weighted_class_shares(const std::vector<int>& labels,
                                                    const Eigen::VectorXd& weights) {
  std::array<double, kNumModes> shares{};
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    shares[static_cast<std::size_t>(labels[i])] += weights[static_cast<Eigen::Index>(i)];
    total += weights[static_cast<Eigen::Index>(i)];
  }
  for (double& s : shares) s /= total;
  return shares;
}

std::array<bool, kNumModes> classes_present(const std::vector<int>& labels) {
  std::array<bool, kNumModes> present{};
  for (int y : labels) present[static_cast<std::size_t>(y)] = true;
  return present;
}

void Model::mask_absent_classes(Eigen::MatrixXd& proba) const {
  bool any_absent = false;
  for (bool p : class_present_)
    if (!p) any_absent = true;
  if (!any_absent) return;
  for (int c = 0; c < kNumModes; ++c)
    if (!class_present_[static_cast<std::size_t>(c)]) proba.col(c).setZero();
  for (Eigen::Index i = 0; i < proba.rows(); ++i) {
    const double s = proba.row(i).sum();
    if (s > 0.0) proba.row(i) /= s;
  }
}

Eigen::MatrixXd Model::predict_proba(const Eigen::MatrixXd& X) const {
  if (X.cols() != feature_count_)
    throw ShapeError("expected " + std::to_string(feature_count_) + " feature columns, got " +
                     std::to_string(X.cols()));
  if (X.rows() == 0) return Eigen::MatrixXd(0, kNumModes);
  return predict_proba_impl(X);
}

std::vector<int> Model::predict(const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd proba = predict_proba(X);
  std::vector<int> labels(static_cast<std::size_t>(proba.rows()));
  for (Eigen::Index i = 0; i < proba.rows(); ++i)
    labels[static_cast<std::size_t>(i)] = argmax_row(proba.row(i));
  return labels;
}

FittedModel fit(const LearnerSpec& spec, const EncodedDataset& data) {
  spec.validate();
  data.validate();
  switch (spec.family) {
    case Family::kMnl: return fit_mnl(data, std::get<MnlConfig>(spec.params), spec.seed);
    case Family::kNb: return fit_gaussian_nb(data, std::get<NbConfig>(spec.params), spec.seed);
    case Family::kSvm: return fit_linear_svm(data, std::get<SvmConfig>(spec.params), spec.seed);
    case Family::kAnn: return fit_mlp(data, std::get<MlpConfig>(spec.params), spec.seed);
    case Family::kKnn: return fit_knn(data, std::get<KnnConfig>(spec.params), spec.seed);
    case Family::kCart: return fit_cart(data, std::get<CartConfig>(spec.params), spec.seed);
    case Family::kRf:
      return fit_random_forest(data, std::get<ForestConfig>(spec.params), spec.seed);
    case Family::kBoost:
      return fit_gradient_boosting(data, std::get<BoostConfig>(spec.params), spec.seed);
    case Family::kBag: return fit_bagging(data, std::get<BaggingConfig>(spec.params), spec.seed);
  }
  throw ValidationError("unreachable family");
}

}  // namespace freightbench
