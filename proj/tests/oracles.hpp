// Test-side oracles, independent of the library's implementation paths:
// central finite differences for gradient checks and an exhaustive
// split-enumeration CART builder.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <vector>

#include "freightbench/dataset.hpp"
#include "freightbench/rng.hpp"
#include "freightbench/tree.hpp"

namespace oracles {

inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = f(probe);
    probe[i] = x[i] - step;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

// Relative error with an absolute floor so near-zero pairs compare absolutely.
inline double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                 double floor = 1e-3) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double denom = std::max(floor, std::abs(a[i]) + std::abs(b[i]));
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

inline freightbench::EncodedDataset make_dataset(const Eigen::MatrixXd& x,
                                                 const std::vector<int>& y,
                                                 const Eigen::VectorXd& w) {
  freightbench::EncodedDataset d;
  d.features = x;
  d.labels = y;
  d.weights = w;
  d.feature_names.resize(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    d.feature_names[static_cast<std::size_t>(j)] = "f" + std::to_string(j);
  d.class_names = freightbench::mode_class_names();
  d.validate();
  return d;
}

inline freightbench::EncodedDataset make_dataset(const Eigen::MatrixXd& x,
                                                 const std::vector<int>& y) {
  return make_dataset(x, y, Eigen::VectorXd::Ones(x.rows()));
}

// --- exhaustive CART oracle ---------------------------------------------------

struct OracleCartConfig {
  int max_depth = -1;
  int min_samples_split = 2;
};

namespace detail {

inline double gini_of(const std::array<double, freightbench::kNumModes>& counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  double s = 0.0;
  for (double c : counts) {
    const double r = c / total;
    s += r * r;
  }
  return 1.0 - s;
}

inline int build_oracle_node(const Eigen::MatrixXd& x, const std::vector<int>& y,
                             const Eigen::VectorXd& w, const std::vector<int>& rows, int depth,
                             const OracleCartConfig& cfg, freightbench::ClassificationTree& out) {
  std::array<double, freightbench::kNumModes> counts{};
  std::array<int, freightbench::kNumModes> ncounts{};
  for (int r : rows) {
    counts[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])] += w[r];
    ncounts[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])] += 1;
  }
  bool pure = false;
  for (int c : ncounts)
    if (c == static_cast<int>(rows.size())) pure = true;

  const bool splittable = !pure && static_cast<int>(rows.size()) >= cfg.min_samples_split &&
                          (cfg.max_depth < 0 || depth < cfg.max_depth);

  int best_feature = -1;
  double best_threshold = 0.0;
  double best_decrease = 0.0;
  if (splittable) {
    const double parent_gini = gini_of(counts);
    double parent_total = 0.0;
    for (double c : counts) parent_total += c;
    for (int f = 0; f < static_cast<int>(x.cols()); ++f) {
      std::vector<double> values;
      for (int r : rows) values.push_back(x(r, f));
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
      for (std::size_t v = 0; v + 1 < values.size(); ++v) {
        double t = 0.5 * (values[v] + values[v + 1]);
        if (!(t < values[v + 1])) t = values[v];
        std::array<double, freightbench::kNumModes> left{}, right{};
        for (int r : rows) {
          auto& side = x(r, f) <= t ? left : right;
          side[static_cast<std::size_t>(y[static_cast<std::size_t>(r)])] += w[r];
        }
        double left_total = 0.0, right_total = 0.0;
        for (double c : left) left_total += c;
        for (double c : right) right_total += c;
        const double decrease = parent_gini - (left_total / parent_total) * gini_of(left) -
                                (right_total / parent_total) * gini_of(right);
        if (decrease > best_decrease) {
          best_feature = f;
          best_threshold = t;
          best_decrease = decrease;
        }
      }
    }
  }

  const int index = static_cast<int>(out.nodes.size());
  out.nodes.emplace_back();
  if (best_feature < 0) {
    out.nodes[static_cast<std::size_t>(index)].feature = -1;
    out.nodes[static_cast<std::size_t>(index)].counts = counts;
    return index;
  }
  std::vector<int> left_rows, right_rows;
  for (int r : rows)
    (x(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
  const int li = build_oracle_node(x, y, w, left_rows, depth + 1, cfg, out);
  const int ri = build_oracle_node(x, y, w, right_rows, depth + 1, cfg, out);
  freightbench::TreeNode& node = out.nodes[static_cast<std::size_t>(index)];
  node.feature = best_feature;
  node.threshold = best_threshold;
  node.left = li;
  node.right = ri;
  return index;
}

}  // namespace detail

inline freightbench::ClassificationTree oracle_cart(const Eigen::MatrixXd& x,
                                                    const std::vector<int>& y,
                                                    const Eigen::VectorXd& w,
                                                    const OracleCartConfig& cfg = {}) {
  freightbench::ClassificationTree tree;
  std::vector<int> rows(static_cast<std::size_t>(x.rows()));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  detail::build_oracle_node(x, y, w, rows, 0, cfg, tree);
  tree.importance_raw.assign(static_cast<std::size_t>(x.cols()), 0.0);
  return tree;
}

// Structural equality: same decision features/thresholds and, at the leaves,
// the same weighted class counts.
inline bool trees_equal(const freightbench::ClassificationTree& a, int ia,
                        const freightbench::ClassificationTree& b, int ib,
                        double tol = 0.0) {
  const freightbench::TreeNode& na = a.nodes[static_cast<std::size_t>(ia)];
  const freightbench::TreeNode& nb = b.nodes[static_cast<std::size_t>(ib)];
  if ((na.feature < 0) != (nb.feature < 0)) return false;
  if (na.feature < 0) {
    for (std::size_t c = 0; c < freightbench::kNumModes; ++c)
      if (std::abs(na.counts[c] - nb.counts[c]) > tol) return false;
    return true;
  }
  if (na.feature != nb.feature) return false;
  if (std::abs(na.threshold - nb.threshold) > tol) return false;
  return trees_equal(a, na.left, b, nb.left, tol) && trees_equal(a, na.right, b, nb.right, tol);
}

inline bool trees_equal(const freightbench::ClassificationTree& a,
                        const freightbench::ClassificationTree& b, double tol = 0.0) {
  return trees_equal(a, 0, b, 0, tol);
}

// Random small dataset on dyadic grids: feature values are multiples of 0.5
// and weights multiples of 0.25, so both split-scoring routes produce
// bit-identical doubles.
inline freightbench::EncodedDataset random_dyadic_dataset(freightbench::Rng& rng, int n_rows,
                                                          int n_features, int n_classes) {
  Eigen::MatrixXd x(n_rows, n_features);
  std::vector<int> y(static_cast<std::size_t>(n_rows));
  Eigen::VectorXd w(n_rows);
  for (int i = 0; i < n_rows; ++i) {
    for (int f = 0; f < n_features; ++f)
      x(i, f) = 0.5 * static_cast<double>(rng.uniform_int(12));
    y[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(
        static_cast<std::uint64_t>(n_classes)));
    w[i] = 0.25 * static_cast<double>(1 + rng.uniform_int(8));
  }
  return make_dataset(x, y, w);
}

}  // namespace oracles
