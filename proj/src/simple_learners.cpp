#include "freightbench/simple_learners.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <numeric>

#include "freightbench/errors.hpp"
#include "freightbench/rng.hpp"

namespace freightbench {
namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(i, c));
  j["data"] = std::move(data);
  return j;
}

json vector_to_json(const Eigen::VectorXd& v) {
  std::vector<double> data(v.data(), v.data() + v.size());
  return json(data);
}

json standardizer_to_json(const Standardizer& s) {
  json j;
  j["mean"] = vector_to_json(s.mean);
  j["scale"] = vector_to_json(s.scale);
  return j;
}

EncodedDataset canonicalized(const EncodedDataset& data) {
  return data.subset(canonical_row_order(data));
}

Eigen::VectorXd normalized_weights(const Eigen::VectorXd& w) { return w / w.sum(); }

Eigen::MatrixXd augment_bias(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd aug(X.rows(), X.cols() + 1);
  aug.leftCols(X.cols()) = X;
  aug.col(X.cols()).setOnes();
  return aug;
}

int present_class_count(const std::array<bool, kNumModes>& present) {
  int n = 0;
  for (bool p : present) n += p ? 1 : 0;
  return n;
}

}  // namespace

Standardizer Standardizer::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& weights) {
  const Eigen::VectorXd w = normalized_weights(weights);
  Standardizer s;
  s.mean = X.transpose() * w;
  Eigen::MatrixXd centered = X.rowwise() - s.mean.transpose();
  s.scale = (centered.array().square().matrix().transpose() * w).array().sqrt();
  for (Eigen::Index j = 0; j < s.scale.size(); ++j)
    if (!(s.scale[j] > 1e-12)) s.scale[j] = 1.0;  // constant feature
  return s;
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& X) const {
  return (X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

// --- multinomial logit -------------------------------------------------------

MnlModel::MnlModel(Eigen::MatrixXd coefficients, Standardizer standardizer,
                   std::array<bool, kNumModes> class_present, std::uint64_t seed,
                   Eigen::Index train_samples, bool converged, int iterations,
                   std::vector<double> loss_history)
    : Model(Family::kMnl, coefficients.cols() - 1, seed, train_samples, class_present),
      coefficients_(std::move(coefficients)),
      standardizer_(std::move(standardizer)),
      converged_(converged),
      iterations_(iterations),
      loss_history_(std::move(loss_history)) {}

Eigen::MatrixXd MnlModel::predict_proba_impl(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd scores = augment_bias(standardizer_.transform(X)) * coefficients_.transpose();
  softmax_rows(scores);
  mask_absent_classes(scores);
  return scores;
}

std::string MnlModel::params_json() const {
  json j;
  j["coefficients"] = matrix_to_json(coefficients_);
  j["standardizer"] = standardizer_to_json(standardizer_);
  j["converged"] = converged_;
  j["iterations"] = iterations_;
  return j.dump();
}

double mnl_loss_and_gradient(const Eigen::MatrixXd& coef_free, const Eigen::MatrixXd& x_aug,
                             const std::vector<int>& labels, const Eigen::VectorXd& norm_weights,
                             Eigen::MatrixXd* gradient) {
  const Eigen::Index n = x_aug.rows();
  Eigen::MatrixXd scores(n, kNumModes);
  scores.col(0).setZero();
  scores.rightCols(kNumModes - 1) = x_aug * coef_free.transpose();

  double loss = 0.0;
  Eigen::MatrixXd proba(n, kNumModes);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = scores.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (scores.row(i).array() - m).exp();
    const double z = e.sum();
    proba.row(i) = e / z;
    loss += norm_weights[i] * (std::log(z) + m - scores(i, labels[static_cast<std::size_t>(i)]));
  }
  if (gradient != nullptr) {
    Eigen::MatrixXd residual = proba;
    for (Eigen::Index i = 0; i < n; ++i) {
      residual(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
      residual.row(i) *= norm_weights[i];
    }
    *gradient = residual.rightCols(kNumModes - 1).transpose() * x_aug;
  }
  return loss;
}

std::shared_ptr<MnlModel> fit_mnl(const EncodedDataset& data, const MnlConfig& config,
                                  std::uint64_t seed) {
  data.validate();
  const auto present = classes_present(data.labels);
  if (present_class_count(present) < 2)
    throw ValidationError("mnl: need at least two classes in the training data");

  const EncodedDataset d = canonicalized(data);
  const Standardizer std_ = Standardizer::fit(d.features, d.weights);
  const Eigen::MatrixXd x_aug = augment_bias(std_.transform(d.features));
  const Eigen::VectorXd w = normalized_weights(d.weights);

  // damped Newton on the free rows; the step is halved until the loss drops,
  // so the recorded loss sequence never increases
  const Eigen::Index dim_aug = x_aug.cols();
  const Eigen::Index n_free = kNumModes - 1;
  const Eigen::Index n_params = n_free * dim_aug;
  Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(n_free, dim_aug);
  Eigen::MatrixXd grad;
  double cur = mnl_loss_and_gradient(coef, x_aug, d.labels, w, nullptr);
  if (!std::isfinite(cur)) throw NumericalError("mnl: non-finite loss at iteration 0");
  std::vector<double> history{cur};
  bool converged = false;
  int iterations = 0;

  Eigen::MatrixXd proba(d.size(), kNumModes);
  Eigen::MatrixXd hessian(n_params, n_params);
  Eigen::MatrixXd scaled(d.size(), dim_aug);
  for (int it = 0; it < config.max_iter; ++it) {
    mnl_loss_and_gradient(coef, x_aug, d.labels, w, &grad);
    if (grad.cwiseAbs().maxCoeff() < config.tol) {
      converged = true;
      break;
    }

    // H[(c,a),(c',b)] = sum_i w_i p_ic (delta_cc' - p_ic') x_ia x_ib over free classes
    Eigen::MatrixXd scores(d.size(), kNumModes);
    scores.col(0).setZero();
    scores.rightCols(kNumModes - 1) = x_aug * coef.transpose();
    proba = scores;
    softmax_rows(proba);
    for (Eigen::Index c = 0; c < n_free; ++c) {
      for (Eigen::Index c2 = c; c2 < n_free; ++c2) {
        const Eigen::ArrayXd pc = proba.col(c + 1).array();
        const Eigen::ArrayXd pc2 = proba.col(c2 + 1).array();
        const Eigen::ArrayXd v = w.array() * pc * ((c == c2 ? 1.0 : 0.0) - pc2);
        scaled = x_aug.array().colwise() * v;
        const Eigen::MatrixXd block = scaled.transpose() * x_aug;
        hessian.block(c * dim_aug, c2 * dim_aug, dim_aug, dim_aug) = block;
        if (c2 != c)
          hessian.block(c2 * dim_aug, c * dim_aug, dim_aug, dim_aug) = block.transpose();
      }
    }
    hessian.diagonal().array() += 1e-10;

    // class-major flattening matching the Hessian block layout
    Eigen::VectorXd grad_flat(n_params);
    for (Eigen::Index c = 0; c < n_free; ++c)
      for (Eigen::Index a = 0; a < dim_aug; ++a) grad_flat[c * dim_aug + a] = grad(c, a);
    Eigen::VectorXd step = hessian.ldlt().solve(-grad_flat);
    if (!step.allFinite()) step = -grad_flat;  // fall back to plain gradient descent

    bool accepted = false;
    double t = 1.0;
    while (t >= 1e-14) {
      Eigen::MatrixXd cand = coef;
      for (Eigen::Index c = 0; c < n_free; ++c)
        for (Eigen::Index a = 0; a < dim_aug; ++a) cand(c, a) += t * step[c * dim_aug + a];
      const double cand_loss = mnl_loss_and_gradient(cand, x_aug, d.labels, w, nullptr);
      if (std::isfinite(cand_loss) && cand_loss <= cur) {
        coef = std::move(cand);
        cur = cand_loss;
        accepted = true;
        break;
      }
      if (!std::isfinite(cand_loss) && t < 1e-13)
        throw NumericalError("mnl: non-finite loss at iteration " + std::to_string(it));
      t *= 0.5;
    }
    iterations = it + 1;
    if (!accepted) break;  // stalled below the minimum step size
    history.push_back(cur);
  }

  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(kNumModes, x_aug.cols());
  full.bottomRows(kNumModes - 1) = coef;
  return std::make_shared<MnlModel>(std::move(full), std_, present, seed, d.size(), converged,
                                    iterations, std::move(history));
}

// --- Gaussian naive Bayes ----------------------------------------------------

GaussianNbModel::GaussianNbModel(std::array<double, kNumModes> priors, Eigen::MatrixXd means,
                                 Eigen::MatrixXd variances, double epsilon,
                                 std::array<bool, kNumModes> class_present, std::uint64_t seed,
                                 Eigen::Index train_samples)
    : Model(Family::kNb, means.cols(), seed, train_samples, class_present),
      priors_(priors),
      means_(std::move(means)),
      variances_(std::move(variances)),
      epsilon_(epsilon) {}

Eigen::MatrixXd GaussianNbModel::predict_proba_impl(const Eigen::MatrixXd& X) const {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd scores(n, kNumModes);
  constexpr double kMinusInf = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < kNumModes; ++c) {
    if (!class_present()[static_cast<std::size_t>(c)]) {
      scores.col(c).setConstant(kMinusInf);
      continue;
    }
    const Eigen::RowVectorXd mu = means_.row(c);
    const Eigen::RowVectorXd var = variances_.row(c);
    const double log_norm =
        -0.5 * (var.array().log() + std::log(2.0 * M_PI)).sum() + std::log(priors_[static_cast<std::size_t>(c)]);
    scores.col(c) =
        ((X.rowwise() - mu).array().square().rowwise() / (2.0 * var.array())).rowwise().sum() * -1.0 +
        log_norm;
  }
  softmax_rows(scores);
  mask_absent_classes(scores);
  return scores;
}

std::string GaussianNbModel::params_json() const {
  json j;
  j["priors"] = priors_;
  j["means"] = matrix_to_json(means_);
  j["variances"] = matrix_to_json(variances_);
  j["epsilon"] = epsilon_;
  return j.dump();
}

std::shared_ptr<GaussianNbModel> fit_gaussian_nb(const EncodedDataset& data,
                                                 const NbConfig& config, std::uint64_t seed) {
  data.validate();
  const EncodedDataset d = canonicalized(data);
  const auto present = classes_present(d.labels);
  const Eigen::Index n = d.size();
  const Eigen::Index dim = d.feature_count();

  // epsilon scales with the largest overall feature variance
  const Eigen::VectorXd wn = normalized_weights(d.weights);
  const Eigen::VectorXd gmean = d.features.transpose() * wn;
  const Eigen::VectorXd gvar =
      (d.features.rowwise() - gmean.transpose()).array().square().matrix().transpose() * wn;
  const double max_var = gvar.maxCoeff();
  const double epsilon = config.var_smoothing * (max_var > 0.0 ? max_var : 1.0);

  std::array<double, kNumModes> priors = weighted_class_shares(d.labels, d.weights);
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(kNumModes, dim);
  Eigen::MatrixXd vars = Eigen::MatrixXd::Zero(kNumModes, dim);
  for (int c = 0; c < kNumModes; ++c) {
    if (!present[static_cast<std::size_t>(c)]) {
      vars.row(c).setOnes();
      continue;
    }
    double wc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (d.labels[static_cast<std::size_t>(i)] == c) wc += d.weights[i];
    Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(dim);
    for (Eigen::Index i = 0; i < n; ++i)
      if (d.labels[static_cast<std::size_t>(i)] == c) mu += (d.weights[i] / wc) * d.features.row(i);
    Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(dim);
    for (Eigen::Index i = 0; i < n; ++i)
      if (d.labels[static_cast<std::size_t>(i)] == c)
        var += (d.weights[i] / wc) * (d.features.row(i) - mu).array().square().matrix();
    means.row(c) = mu;
    vars.row(c) = var.array() + epsilon;
  }
  return std::make_shared<GaussianNbModel>(priors, std::move(means), std::move(vars), epsilon,
                                           present, seed, n);
}

// --- k-nearest neighbors -----------------------------------------------------

KnnModel::KnnModel(Eigen::MatrixXd train_features, std::vector<int> train_labels,
                   Eigen::VectorXd train_weights, int k,
                   std::array<bool, kNumModes> class_present, std::uint64_t seed)
    : Model(Family::kKnn, train_features.cols(), seed, train_features.rows(), class_present),
      train_features_(std::move(train_features)),
      train_labels_(std::move(train_labels)),
      train_weights_(std::move(train_weights)),
      k_(k) {}

Eigen::MatrixXd KnnModel::predict_proba_impl(const Eigen::MatrixXd& X) const {
  const Eigen::Index n_train = train_features_.rows();
  Eigen::MatrixXd proba = Eigen::MatrixXd::Zero(X.rows(), kNumModes);
  std::vector<int> order(static_cast<std::size_t>(n_train));
  for (Eigen::Index q = 0; q < X.rows(); ++q) {
    const Eigen::VectorXd d2 =
        (train_features_.rowwise() - X.row(q)).rowwise().squaredNorm();
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + k_, order.end(), [&](int a, int b) {
      if (d2[a] != d2[b]) return d2[a] < d2[b];
      return a < b;  // distance ties admit the lower stored index
    });
    double total = 0.0;
    for (int i = 0; i < k_; ++i) {
      const int idx = order[static_cast<std::size_t>(i)];
      proba(q, train_labels_[static_cast<std::size_t>(idx)]) += train_weights_[idx];
      total += train_weights_[idx];
    }
    proba.row(q) /= total;
  }
  return proba;
}

std::string KnnModel::params_json() const {
  json j;
  j["k"] = k_;
  j["train_features"] = matrix_to_json(train_features_);
  j["train_labels"] = train_labels_;
  j["train_weights"] = vector_to_json(train_weights_);
  return j.dump();
}

std::shared_ptr<KnnModel> fit_knn(const EncodedDataset& data, const KnnConfig& config,
                                  std::uint64_t seed) {
  data.validate();
  if (config.k > data.size())
    throw ValidationError("knn: k=" + std::to_string(config.k) + " exceeds sample count " +
                          std::to_string(data.size()));
  EncodedDataset d = canonicalized(data);
  const auto present = classes_present(d.labels);
  return std::make_shared<KnnModel>(std::move(d.features), std::move(d.labels),
                                    std::move(d.weights), config.k, present, seed);
}

// --- one-vs-rest linear SVM --------------------------------------------------

LinearSvmModel::LinearSvmModel(Eigen::MatrixXd weights, Standardizer standardizer, double c,
                               std::array<bool, kNumModes> class_present, std::uint64_t seed,
                               Eigen::Index train_samples)
    : Model(Family::kSvm, weights.cols() - 1, seed, train_samples, class_present),
      weights_(std::move(weights)),
      standardizer_(std::move(standardizer)),
      c_(c) {}

Eigen::MatrixXd LinearSvmModel::decision_values(const Eigen::MatrixXd& X) const {
  return augment_bias(standardizer_.transform(X)) * weights_.transpose();
}

Eigen::MatrixXd LinearSvmModel::predict_proba_impl(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd scores = decision_values(X);
  softmax_rows(scores);
  mask_absent_classes(scores);
  return scores;
}

std::string LinearSvmModel::params_json() const {
  json j;
  j["weights"] = matrix_to_json(weights_);
  j["standardizer"] = standardizer_to_json(standardizer_);
  j["c"] = c_;
  return j.dump();
}

double svm_objective_and_gradient(const Eigen::VectorXd& weights_with_bias,
                                  const Eigen::MatrixXd& x_aug, const Eigen::VectorXd& signs,
                                  const Eigen::VectorXd& norm_weights, double c,
                                  Eigen::VectorXd* gradient) {
  const Eigen::Index dim = weights_with_bias.size() - 1;
  const Eigen::VectorXd margins = signs.array() * (x_aug * weights_with_bias).array();
  double hinge = 0.0;
  if (gradient != nullptr) {
    gradient->setZero(weights_with_bias.size());
    gradient->head(dim) = weights_with_bias.head(dim);
  }
  for (Eigen::Index i = 0; i < x_aug.rows(); ++i) {
    const double m = margins[i];
    if (m < 1.0) {
      hinge += norm_weights[i] * (1.0 - m);
      if (gradient != nullptr)
        *gradient -= (c * norm_weights[i] * signs[i]) * x_aug.row(i).transpose();
    }
  }
  return 0.5 * weights_with_bias.head(dim).squaredNorm() + c * hinge;
}

std::shared_ptr<LinearSvmModel> fit_linear_svm(const EncodedDataset& data,
                                               const SvmConfig& config, std::uint64_t seed) {
  data.validate();
  const auto present = classes_present(data.labels);
  if (present_class_count(present) < 2)
    throw ValidationError("svm: need at least two classes in the training data");

  const EncodedDataset d = canonicalized(data);
  const Standardizer std_ = Standardizer::fit(d.features, d.weights);
  const Eigen::MatrixXd x_aug = augment_bias(std_.transform(d.features));
  const Eigen::VectorXd w = normalized_weights(d.weights);
  const Eigen::Index n = d.size();

  Eigen::MatrixXd all = Eigen::MatrixXd::Zero(kNumModes, x_aug.cols());
  Eigen::VectorXd signs(n);
  Eigen::VectorXd grad;
  for (int cls = 0; cls < kNumModes; ++cls) {
    for (Eigen::Index i = 0; i < n; ++i)
      signs[i] = d.labels[static_cast<std::size_t>(i)] == cls ? 1.0 : -1.0;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(x_aug.cols());
    Eigen::VectorXd best_v = v;
    double best_obj = svm_objective_and_gradient(v, x_aug, signs, w, config.c, nullptr);
    for (int t = 0; t < config.max_iter; ++t) {
      const double obj = svm_objective_and_gradient(v, x_aug, signs, w, config.c, &grad);
      if (!std::isfinite(obj))
        throw NumericalError("svm: non-finite objective at iteration " + std::to_string(t));
      if (obj < best_obj) {
        best_obj = obj;
        best_v = v;
      }
      const double eta = config.learning_rate / (1.0 + 0.02 * t);
      v -= eta * grad;
    }
    const double final_obj = svm_objective_and_gradient(v, x_aug, signs, w, config.c, nullptr);
    all.row(cls) = (final_obj < best_obj ? v : best_v).transpose();
  }
  return std::make_shared<LinearSvmModel>(std::move(all), std_, config.c, present, seed, n);
}

// --- single-hidden-layer MLP -------------------------------------------------

MlpModel::MlpModel(MlpParameters params, Standardizer standardizer,
                   std::array<bool, kNumModes> class_present, std::uint64_t seed,
                   Eigen::Index train_samples)
    : Model(Family::kAnn, params.w1.rows(), seed, train_samples, class_present),
      params_(std::move(params)),
      standardizer_(std::move(standardizer)) {}

Eigen::MatrixXd MlpModel::predict_proba_impl(const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd xs = standardizer_.transform(X);
  Eigen::MatrixXd hidden = ((xs * params_.w1).rowwise() + params_.b1).cwiseMax(0.0);
  Eigen::MatrixXd scores = (hidden * params_.w2).rowwise() + params_.b2;
  softmax_rows(scores);
  mask_absent_classes(scores);
  return scores;
}

std::string MlpModel::params_json() const {
  json j;
  j["w1"] = matrix_to_json(params_.w1);
  j["b1"] = vector_to_json(params_.b1.transpose());
  j["w2"] = matrix_to_json(params_.w2);
  j["b2"] = vector_to_json(params_.b2.transpose());
  j["standardizer"] = standardizer_to_json(standardizer_);
  return j.dump();
}

double mlp_loss_and_gradient(const MlpParameters& params, const Eigen::MatrixXd& x,
                             const std::vector<int>& labels, const Eigen::VectorXd& weights,
                             MlpParameters* gradient) {
  const Eigen::Index n = x.rows();
  const Eigen::VectorXd w = normalized_weights(weights);

  const Eigen::MatrixXd z1 = (x * params.w1).rowwise() + params.b1;
  const Eigen::MatrixXd a1 = z1.cwiseMax(0.0);
  Eigen::MatrixXd scores = (a1 * params.w2).rowwise() + params.b2;

  double loss = 0.0;
  Eigen::MatrixXd proba(n, kNumModes);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = scores.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (scores.row(i).array() - m).exp();
    const double z = e.sum();
    proba.row(i) = e / z;
    loss += w[i] * (std::log(z) + m - scores(i, labels[static_cast<std::size_t>(i)]));
  }
  if (gradient != nullptr) {
    Eigen::MatrixXd dscores = proba;
    for (Eigen::Index i = 0; i < n; ++i) {
      dscores(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
      dscores.row(i) *= w[i];
    }
    gradient->w2 = a1.transpose() * dscores;
    gradient->b2 = dscores.colwise().sum();
    Eigen::MatrixXd da1 = dscores * params.w2.transpose();
    da1 = (z1.array() > 0.0).select(da1, 0.0);
    gradient->w1 = x.transpose() * da1;
    gradient->b1 = da1.colwise().sum();
  }
  return loss;
}

std::shared_ptr<MlpModel> fit_mlp(const EncodedDataset& data, const MlpConfig& config,
                                  std::uint64_t seed) {
  data.validate();
  const auto present = classes_present(data.labels);
  if (present_class_count(present) < 2)
    throw ValidationError("ann: need at least two classes in the training data");

  const EncodedDataset d = canonicalized(data);
  const Standardizer std_ = Standardizer::fit(d.features, d.weights);
  const Eigen::MatrixXd xs = std_.transform(d.features);
  const Eigen::Index n = d.size();
  const Eigen::Index dim = d.feature_count();
  const int hidden = config.hidden_units;

  Rng rng(derive_seed(seed, {0x4d4c50u}));
  MlpParameters p;
  p.w1.resize(dim, hidden);
  const double s1 = std::sqrt(2.0 / static_cast<double>(dim));
  for (Eigen::Index i = 0; i < dim; ++i)
    for (int h = 0; h < hidden; ++h) p.w1(i, h) = s1 * rng.normal();
  p.b1 = Eigen::RowVectorXd::Zero(hidden);
  p.w2.resize(hidden, kNumModes);
  const double s2 = std::sqrt(2.0 / static_cast<double>(hidden));
  for (int h = 0; h < hidden; ++h)
    for (int c = 0; c < kNumModes; ++c) p.w2(h, c) = s2 * rng.normal();
  p.b2 = Eigen::RowVectorXd::Zero(kNumModes);

  const int batch = std::min<int>(config.batch_size, static_cast<int>(n));
  MlpParameters grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // batch composition comes from the seeded stream, not the input order
    const std::vector<std::size_t> perm = rng.permutation(static_cast<std::size_t>(n));
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < perm.size(); start += static_cast<std::size_t>(batch)) {
      const std::size_t stop = std::min(perm.size(), start + static_cast<std::size_t>(batch));
      const std::size_t bn = stop - start;
      Eigen::MatrixXd xb(bn, dim);
      std::vector<int> yb(bn);
      Eigen::VectorXd wb(bn);
      for (std::size_t i = 0; i < bn; ++i) {
        const std::size_t r = perm[start + i];
        xb.row(static_cast<Eigen::Index>(i)) = xs.row(static_cast<Eigen::Index>(r));
        yb[i] = d.labels[r];
        wb[static_cast<Eigen::Index>(i)] = d.weights[static_cast<Eigen::Index>(r)];
      }
      epoch_loss += mlp_loss_and_gradient(p, xb, yb, wb, &grad);
      ++batches;
      p.w1 -= config.learning_rate * grad.w1;
      p.b1 -= config.learning_rate * grad.b1;
      p.w2 -= config.learning_rate * grad.w2;
      p.b2 -= config.learning_rate * grad.b2;
    }
    if (!std::isfinite(epoch_loss / batches))
      throw NumericalError("ann: non-finite loss at epoch " + std::to_string(epoch));
  }
  return std::make_shared<MlpModel>(std::move(p), std_, present, seed, n);
}

}  // namespace freightbench
