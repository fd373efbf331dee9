#include <doctest.h>

#include <cmath>

#include "freightbench/errors.hpp"
#include "freightbench/simple_learners.hpp"
#include "oracles.hpp"

using namespace freightbench;
using oracles::make_dataset;

namespace {

// Random learnable dataset: class-shifted Gaussians plus noise features.
EncodedDataset random_blobs(std::uint64_t seed, int n, int d, int n_classes,
                            bool dyadic_weights = false) {
  Rng rng(seed);
  Eigen::MatrixXd x(n, d);
  std::vector<int> y(static_cast<std::size_t>(n));
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) {
    const int cls = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_classes)));
    y[static_cast<std::size_t>(i)] = cls;
    for (int f = 0; f < d; ++f)
      x(i, f) = rng.normal(f < 2 ? 1.5 * cls : 0.0, 1.0);
    w[i] = dyadic_weights ? 0.25 * static_cast<double>(1 + rng.uniform_int(8))
                          : std::exp(0.3 * rng.normal());
  }
  return make_dataset(x, y, w);
}

}  // namespace

// --- multinomial logit -------------------------------------------------------

TEST_CASE("mnl intercept-only fit recovers weighted class shares") {
  // all features constant, two classes with weight ratio 1:3
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(8, 2, 4.0);
  std::vector<int> y = {0, 0, 0, 0, 1, 1, 1, 1};
  Eigen::VectorXd w(8);
  w << 1, 1, 1, 1, 3, 3, 3, 3;
  const auto model = fit_mnl(make_dataset(x, y, w), MnlConfig{}, 0);
  CHECK(model->converged());

  const Eigen::MatrixXd proba = model->predict_proba(x.topRows(1));
  CHECK(proba(0, 0) == doctest::Approx(0.25).epsilon(1e-4));
  CHECK(proba(0, 1) == doctest::Approx(0.75).epsilon(1e-4));
  CHECK(proba(0, 2) == 0.0);  // absent classes get exactly zero
}

TEST_CASE("mnl with all-zero coefficients predicts the uniform distribution") {
  Standardizer std_;
  std_.mean = Eigen::VectorXd::Zero(3);
  std_.scale = Eigen::VectorXd::Ones(3);
  const MnlModel model(Eigen::MatrixXd::Zero(kNumModes, 4), std_,
                       {true, true, true, true, true}, 0, 0, true, 0, {});
  const Eigen::MatrixXd proba = model.predict_proba(Eigen::MatrixXd::Random(4, 3));
  for (Eigen::Index i = 0; i < proba.rows(); ++i)
    for (int c = 0; c < kNumModes; ++c) CHECK(proba(i, c) == doctest::Approx(0.2));
}

TEST_CASE("mnl analytic gradient matches central finite differences") {
  Rng rng(42);
  const int n = 20, d = 4;
  Eigen::MatrixXd x_aug(n, d + 1);
  std::vector<int> y(n);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < d; ++f) x_aug(i, f) = rng.normal();
    x_aug(i, d) = 1.0;
    y[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(3));
    w[i] = 0.2 + rng.uniform01();
  }
  w /= w.sum();

  Eigen::MatrixXd coef(kNumModes - 1, d + 1);
  for (Eigen::Index i = 0; i < coef.rows(); ++i)
    for (Eigen::Index j = 0; j < coef.cols(); ++j) coef(i, j) = 0.5 * rng.normal();

  Eigen::MatrixXd analytic;
  mnl_loss_and_gradient(coef, x_aug, y, w, &analytic);

  const auto flat_loss = [&](const Eigen::VectorXd& theta) {
    const Eigen::MatrixXd m =
        Eigen::Map<const Eigen::MatrixXd>(theta.data(), coef.rows(), coef.cols());
    return mnl_loss_and_gradient(m, x_aug, y, w, nullptr);
  };
  const Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(coef.data(), coef.size());
  const Eigen::VectorXd fd = oracles::finite_difference_gradient(flat_loss, flat, 1e-5);
  const Eigen::VectorXd analytic_flat =
      Eigen::Map<const Eigen::VectorXd>(analytic.data(), analytic.size());
  CHECK(oracles::max_relative_error(analytic_flat, fd) < 1e-5);
}

TEST_CASE("mnl training loss never increases") {
  const EncodedDataset data = random_blobs(7, 120, 5, 3);
  const auto model = fit_mnl(data, MnlConfig{.max_iter = 300}, 0);
  const auto& history = model->loss_history();
  REQUIRE(history.size() > 2);
  for (std::size_t i = 1; i < history.size(); ++i) CHECK(history[i] <= history[i - 1]);
}

TEST_CASE("mnl probabilities are shift-invariant in the coefficients") {
  const EncodedDataset data = random_blobs(9, 80, 3, 3);
  const auto fitted = fit_mnl(data, MnlConfig{.max_iter = 100}, 0);

  Eigen::MatrixXd shifted = fitted->coefficients();
  const Eigen::RowVectorXd c = Eigen::RowVectorXd::LinSpaced(shifted.cols(), -0.7, 1.3);
  for (Eigen::Index r = 0; r < shifted.rows(); ++r) shifted.row(r) += c;
  const MnlModel other(shifted, fitted->standardizer(), fitted->class_present(), 0, 0, true, 0,
                       {});

  const Eigen::MatrixXd q = Eigen::MatrixXd::Random(10, 3);
  const Eigen::MatrixXd pa = fitted->predict_proba(q);
  const Eigen::MatrixXd pb = other.predict_proba(q);
  CHECK((pa - pb).cwiseAbs().maxCoeff() < 1e-12);
}

// --- Gaussian naive Bayes ------------------------------------------------------

TEST_CASE("nb weighted moments match hand computations") {
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 2.0;

  SUBCASE("equal weights: mean 1, variance 1 + epsilon") {
    const auto model = fit_gaussian_nb(make_dataset(x, {2, 2}), NbConfig{}, 0);
    CHECK(model->means()(2, 0) == doctest::Approx(1.0));
    CHECK(model->variances()(2, 0) == doctest::Approx(1.0 + model->epsilon()));
    CHECK(model->epsilon() > 0.0);
  }
  SUBCASE("weights {1,3}: weighted mean 1.5") {
    Eigen::VectorXd w(2);
    w << 1.0, 3.0;
    const auto model = fit_gaussian_nb(make_dataset(x, {2, 2}, w), NbConfig{}, 0);
    CHECK(model->means()(2, 0) == doctest::Approx(1.5));
  }
}

TEST_CASE("nb symmetric classes give 50/50 at the midpoint") {
  Eigen::MatrixXd x(4, 1);
  x << -1.0, -1.0, 1.0, 1.0;
  const auto model = fit_gaussian_nb(make_dataset(x, {0, 0, 1, 1}), NbConfig{}, 0);
  Eigen::MatrixXd q(1, 1);
  q << 0.0;
  const Eigen::MatrixXd proba = model->predict_proba(q);
  CHECK(proba(0, 0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(proba(0, 1) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("nb rows stay stochastic with a duplicated feature column") {
  const EncodedDataset base = random_blobs(3, 60, 3, 3);
  Eigen::MatrixXd x(base.features.rows(), 4);
  x.leftCols(3) = base.features;
  x.col(3) = base.features.col(0);
  const auto model = fit_gaussian_nb(make_dataset(x, base.labels, base.weights), NbConfig{}, 0);
  const Eigen::MatrixXd proba = model->predict_proba(x.topRows(20));
  for (Eigen::Index i = 0; i < proba.rows(); ++i)
    CHECK(proba.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
}

// --- k-nearest neighbors --------------------------------------------------------

TEST_CASE("knn k=1 returns a matching training point's label") {
  Eigen::MatrixXd x(3, 2);
  x << 0, 0, 1, 1, 2, 2;
  const auto model = fit_knn(make_dataset(x, {0, 1, 2}), KnnConfig{.k = 1}, 0);
  Eigen::MatrixXd q(1, 2);
  q << 1, 1;
  CHECK(model->predict(q) == std::vector<int>{1});
}

TEST_CASE("knn votes are weight fractions") {
  Eigen::MatrixXd x(5, 1);
  x << 1.0, 1.1, 0.9, 1.05, 0.95;
  const auto model = fit_knn(make_dataset(x, {0, 0, 0, 1, 1}), KnnConfig{.k = 5}, 0);
  Eigen::MatrixXd q(1, 1);
  q << 1.0;
  const Eigen::MatrixXd proba = model->predict_proba(q);
  CHECK(proba(0, 0) == doctest::Approx(0.6));
  CHECK(proba(0, 1) == doctest::Approx(0.4));
}

TEST_CASE("knn vote ties resolve to the lowest class index") {
  Eigen::MatrixXd x(4, 1);
  x << 0.0, 2.0, -2.0, 4.0;
  const auto model = fit_knn(make_dataset(x, {3, 1, 3, 1}), KnnConfig{.k = 2}, 0);
  Eigen::MatrixXd q(1, 1);
  q << 1.0;  // nearest two: x=0 (class 3) and x=2 (class 1), equal votes
  CHECK(model->predict(q) == std::vector<int>{1});
}

TEST_CASE("knn with k=N predicts the weighted majority everywhere") {
  const EncodedDataset data = random_blobs(5, 40, 2, 3);
  const auto model = fit_knn(data, KnnConfig{.k = 40}, 0);
  const auto shares = weighted_class_shares(data.labels, data.weights);
  int majority = 0;
  for (int c = 1; c < kNumModes; ++c)
    if (shares[static_cast<std::size_t>(c)] > shares[static_cast<std::size_t>(majority)])
      majority = c;
  const Eigen::MatrixXd q = Eigen::MatrixXd::Random(25, 2) * 10.0;
  for (int label : model->predict(q)) CHECK(label == majority);
}

TEST_CASE("knn rejects k greater than the sample count") {
  const EncodedDataset data = random_blobs(6, 10, 2, 2);
  CHECK_THROWS_AS(fit_knn(data, KnnConfig{.k = 11}, 0), ValidationError);
}

// --- linear SVM ------------------------------------------------------------------

TEST_CASE("svm separates a 1-d two-class problem") {
  Eigen::MatrixXd x(2, 1);
  x << -1.0, 1.0;
  const EncodedDataset data = make_dataset(x, {0, 1});
  const auto model = fit_linear_svm(data, SvmConfig{}, 0);
  CHECK(model->predict(x) == std::vector<int>{0, 1});
}

TEST_CASE("svm subgradient matches finite differences at non-kink points") {
  Rng rng(17);
  const int n = 20, d = 4;
  Eigen::MatrixXd x_aug(n, d + 1);
  Eigen::VectorXd signs(n), w(n);
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < d; ++f) x_aug(i, f) = rng.normal();
    x_aug(i, d) = 1.0;
    signs[i] = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    w[i] = 0.2 + rng.uniform01();
  }
  w /= w.sum();
  Eigen::VectorXd v(d + 1);
  for (int f = 0; f <= d; ++f) v[f] = 0.3 * rng.normal();

  // this seed keeps every margin clear of the hinge kink
  const Eigen::VectorXd margins = signs.array() * (x_aug * v).array();
  for (int i = 0; i < n; ++i) REQUIRE(std::abs(margins[i] - 1.0) > 1e-3);

  Eigen::VectorXd analytic;
  svm_objective_and_gradient(v, x_aug, signs, w, 1.0, &analytic);
  const auto loss = [&](const Eigen::VectorXd& probe) {
    return svm_objective_and_gradient(probe, x_aug, signs, w, 1.0, nullptr);
  };
  const Eigen::VectorXd fd = oracles::finite_difference_gradient(loss, v, 1e-5);
  CHECK(oracles::max_relative_error(analytic, fd) < 1e-5);
}

TEST_CASE("svm: duplicating a sample equals doubling its weight") {
  const EncodedDataset base = random_blobs(21, 30, 3, 2, /*dyadic_weights=*/true);

  Eigen::MatrixXd x_dup(base.features.rows() + 1, 3);
  x_dup.topRows(base.features.rows()) = base.features;
  x_dup.row(base.features.rows()) = base.features.row(4);
  std::vector<int> y_dup = base.labels;
  y_dup.push_back(base.labels[4]);
  Eigen::VectorXd w_dup(base.weights.size() + 1);
  w_dup.head(base.weights.size()) = base.weights;
  w_dup[base.weights.size()] = base.weights[4];

  Eigen::VectorXd w_double = base.weights;
  w_double[4] *= 2.0;

  const auto a = fit_linear_svm(make_dataset(x_dup, y_dup, w_dup), SvmConfig{}, 0);
  const auto b =
      fit_linear_svm(make_dataset(base.features, base.labels, w_double), SvmConfig{}, 0);
  const Eigen::MatrixXd q = Eigen::MatrixXd::Random(15, 3);
  CHECK((a->decision_values(q) - b->decision_values(q)).cwiseAbs().maxCoeff() < 1e-6);
}

// --- MLP ---------------------------------------------------------------------------

TEST_CASE("mlp probability rows sum to one") {
  const EncodedDataset data = random_blobs(31, 80, 4, 3);
  const auto model = fit_mlp(data, MlpConfig{.hidden_units = 8, .epochs = 5}, 3);
  const Eigen::MatrixXd proba = model->predict_proba(Eigen::MatrixXd::Random(30, 4));
  for (Eigen::Index i = 0; i < proba.rows(); ++i)
    CHECK(proba.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mlp full-network gradient matches finite differences") {
  Rng rng(13);
  const int n = 10, d = 3, h = 4;
  Eigen::MatrixXd x(n, d);
  std::vector<int> y(n);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < d; ++f) x(i, f) = rng.normal();
    y[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(3));
    w[i] = 0.2 + rng.uniform01();
  }
  MlpParameters p;
  p.w1.resize(d, h);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < h; ++j) p.w1(i, j) = 0.7 * rng.normal();
  p.b1 = Eigen::RowVectorXd::Constant(h, 0.1);
  p.w2.resize(h, kNumModes);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < kNumModes; ++j) p.w2(i, j) = 0.7 * rng.normal();
  p.b2 = Eigen::RowVectorXd::Constant(kNumModes, -0.05);

  // keep clear of the ReLU kink so finite differences are trustworthy
  const Eigen::MatrixXd z1 = (x * p.w1).rowwise() + p.b1;
  REQUIRE(z1.cwiseAbs().minCoeff() > 1e-3);

  MlpParameters g;
  mlp_loss_and_gradient(p, x, y, w, &g);

  const int total = d * h + h + h * kNumModes + kNumModes;
  const auto pack = [&](const MlpParameters& q) {
    Eigen::VectorXd v(total);
    Eigen::Index at = 0;
    v.segment(at, q.w1.size()) = Eigen::Map<const Eigen::VectorXd>(q.w1.data(), q.w1.size());
    at += q.w1.size();
    v.segment(at, q.b1.size()) = q.b1.transpose();
    at += q.b1.size();
    v.segment(at, q.w2.size()) = Eigen::Map<const Eigen::VectorXd>(q.w2.data(), q.w2.size());
    at += q.w2.size();
    v.segment(at, q.b2.size()) = q.b2.transpose();
    return v;
  };
  const auto unpack = [&](const Eigen::VectorXd& v) {
    MlpParameters q;
    Eigen::Index at = 0;
    q.w1 = Eigen::Map<const Eigen::MatrixXd>(v.data() + at, d, h);
    at += d * h;
    q.b1 = v.segment(at, h).transpose();
    at += h;
    q.w2 = Eigen::Map<const Eigen::MatrixXd>(v.data() + at, h, kNumModes);
    at += h * kNumModes;
    q.b2 = v.segment(at, kNumModes).transpose();
    return q;
  };
  const auto loss = [&](const Eigen::VectorXd& v) {
    return mlp_loss_and_gradient(unpack(v), x, y, w, nullptr);
  };
  const Eigen::VectorXd fd = oracles::finite_difference_gradient(loss, pack(p), 1e-5);
  CHECK(oracles::max_relative_error(pack(g), fd) < 1e-4);
}

TEST_CASE("mlp learns the xor pattern a linear model cannot") {
  Rng rng(77);
  const int n = 200;
  Eigen::MatrixXd x(n, 2);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    const int a = static_cast<int>(rng.uniform_int(2));
    const int b = static_cast<int>(rng.uniform_int(2));
    x(i, 0) = a + 0.05 * rng.normal();
    x(i, 1) = b + 0.05 * rng.normal();
    y[static_cast<std::size_t>(i)] = a ^ b;
  }
  const EncodedDataset data = make_dataset(x, y);
  const auto model = fit_mlp(
      data, MlpConfig{.hidden_units = 16, .epochs = 400, .learning_rate = 0.1, .batch_size = 32},
      5);
  const std::vector<int> pred = model->predict(x);
  int hits = 0;
  for (int i = 0; i < n; ++i)
    hits += pred[static_cast<std::size_t>(i)] == y[static_cast<std::size_t>(i)];
  CHECK(static_cast<double>(hits) / n > 0.9);
}

// --- shared properties ---------------------------------------------------------------

TEST_CASE("fits are invariant to training-row order") {
  const EncodedDataset data = random_blobs(51, 60, 4, 3);
  std::vector<std::size_t> reversed(60);
  for (std::size_t i = 0; i < 60; ++i) reversed[i] = 59 - i;
  const EncodedDataset flipped = data.subset(reversed);
  const Eigen::MatrixXd q = Eigen::MatrixXd::Random(20, 4) * 2.0;

  const auto check_equal = [&](const Model& a, const Model& b) {
    CHECK(a.predict_proba(q) == b.predict_proba(q));
  };
  check_equal(*fit_mnl(data, MnlConfig{.max_iter = 50}, 1),
              *fit_mnl(flipped, MnlConfig{.max_iter = 50}, 1));
  check_equal(*fit_gaussian_nb(data, NbConfig{}, 1), *fit_gaussian_nb(flipped, NbConfig{}, 1));
  check_equal(*fit_knn(data, KnnConfig{}, 1), *fit_knn(flipped, KnnConfig{}, 1));
  check_equal(*fit_linear_svm(data, SvmConfig{.max_iter = 60}, 1),
              *fit_linear_svm(flipped, SvmConfig{.max_iter = 60}, 1));
  check_equal(*fit_mlp(data, MlpConfig{.hidden_units = 8, .epochs = 10}, 1),
              *fit_mlp(flipped, MlpConfig{.hidden_units = 8, .epochs = 10}, 1));
}

TEST_CASE("weight scaling leaves fitted predictions unchanged (dyadic weights)") {
  const EncodedDataset data = random_blobs(53, 60, 4, 3, /*dyadic_weights=*/true);
  EncodedDataset scaled = data;
  scaled.weights *= 7.0;
  const Eigen::MatrixXd q = Eigen::MatrixXd::Random(20, 4) * 2.0;

  const auto check_equal = [&](const Model& a, const Model& b) {
    CHECK(a.predict_proba(q) == b.predict_proba(q));
  };
  check_equal(*fit_mnl(data, MnlConfig{.max_iter = 50}, 1),
              *fit_mnl(scaled, MnlConfig{.max_iter = 50}, 1));
  check_equal(*fit_gaussian_nb(data, NbConfig{}, 1), *fit_gaussian_nb(scaled, NbConfig{}, 1));
  check_equal(*fit_knn(data, KnnConfig{}, 1), *fit_knn(scaled, KnnConfig{}, 1));
  check_equal(*fit_linear_svm(data, SvmConfig{.max_iter = 60}, 1),
              *fit_linear_svm(scaled, SvmConfig{.max_iter = 60}, 1));
  check_equal(*fit_mlp(data, MlpConfig{.hidden_units = 8, .epochs = 10}, 1),
              *fit_mlp(scaled, MlpConfig{.hidden_units = 8, .epochs = 10}, 1));
}
