#include "freightbench/tree.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "freightbench/errors.hpp"

namespace freightbench {
namespace {

using nlohmann::json;

// Midpoint threshold between consecutive distinct values; falls back to the
// lower value if rounding collapses the midpoint onto the upper one.
double split_threshold(double lo, double hi) {
  const double t = 0.5 * (lo + hi);
  return t < hi ? t : lo;
}

struct ClsStats {
  std::array<double, kNumModes> w{};
  double total = 0.0;
  std::array<int, kNumModes> n{};
  int count = 0;

  void add(int label, double weight) {
    w[static_cast<std::size_t>(label)] += weight;
    total += weight;
    ++n[static_cast<std::size_t>(label)];
    ++count;
  }
  bool pure() const {
    for (int c : n)
      if (c == count) return true;
    return false;
  }
  double gini() const {
    double s = 0.0;
    for (double wc : w) {
      const double r = wc / total;
      s += r * r;
    }
    return 1.0 - s;
  }
};

ClsStats subtract(const ClsStats& parent, const ClsStats& left) {
  ClsStats right;
  for (std::size_t c = 0; c < kNumModes; ++c) {
    right.w[c] = parent.w[c] - left.w[c];
    right.n[c] = parent.n[c] - left.n[c];
  }
  right.total = parent.total - left.total;
  right.count = parent.count - left.count;
  return right;
}

struct RegStats {
  double sw = 0.0;    // sum of weights
  double swt = 0.0;   // sum of weight * target
  double swt2 = 0.0;  // sum of weight * target^2
  double swh = 0.0;   // sum of weight * hessian
  int count = 0;

  void add(double weight, double target, double hessian) {
    sw += weight;
    swt += weight * target;
    swt2 += weight * target * target;
    swh += weight * hessian;
    ++count;
  }
  double proxy() const { return sw > 0.0 ? swt * swt / sw : 0.0; }
};

RegStats subtract(const RegStats& parent, const RegStats& left) {
  RegStats right;
  right.sw = parent.sw - left.sw;
  right.swt = parent.swt - left.swt;
  right.swt2 = parent.swt2 - left.swt2;
  right.swh = parent.swh - left.swh;
  right.count = parent.count - left.count;
  return right;
}

// Per-feature instance ids sorted by (value, instance id); the id tiebreak
// keeps every downstream decision independent of input row order.
std::vector<std::vector<int>> presort_features(const Eigen::MatrixXd& X,
                                               const std::vector<int>& instance_rows) {
  const int d = static_cast<int>(X.cols());
  const int n = static_cast<int>(instance_rows.size());
  std::vector<std::vector<int>> sorted(static_cast<std::size_t>(d));
  std::vector<double> values(static_cast<std::size_t>(n));
  for (int f = 0; f < d; ++f) {
    auto& idx = sorted[static_cast<std::size_t>(f)];
    idx.resize(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < n; ++i)
      values[static_cast<std::size_t>(i)] = X(instance_rows[static_cast<std::size_t>(i)], f);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      const double va = values[static_cast<std::size_t>(a)];
      const double vb = values[static_cast<std::size_t>(b)];
      if (va != vb) return va < vb;
      return a < b;
    });
  }
  return sorted;
}

// Stable partition of every feature's slice so each side stays value-sorted.
void partition_slices(std::vector<std::vector<int>>& sorted, int begin, int end,
                      const std::vector<char>& goes_left, std::vector<int>& scratch) {
  for (auto& idx : sorted) {
    int out = begin;
    int spill = 0;
    for (int s = begin; s < end; ++s) {
      const int inst = idx[static_cast<std::size_t>(s)];
      if (goes_left[static_cast<std::size_t>(inst)])
        idx[static_cast<std::size_t>(out++)] = inst;
      else
        scratch[static_cast<std::size_t>(spill++)] = inst;
    }
    std::copy(scratch.begin(), scratch.begin() + spill, idx.begin() + out);
  }
}

struct FoundSplit {
  bool valid = false;
  int feature = 0;
  double threshold = 0.0;
  double score = 0.0;       // quantity maximized (strictly) during search
  double importance = 0.0;  // extensive impurity decrease for the importance tally
  int left_count = 0;
  ClsStats cls_left, cls_right;
  RegStats reg_left, reg_right;
};

const std::vector<int>& candidate_features(const TreeGrowth& growth, int d,
                                           std::vector<int>& storage) {
  if (growth.mtry <= 0 || growth.mtry >= d) {
    storage.resize(static_cast<std::size_t>(d));
    std::iota(storage.begin(), storage.end(), 0);
  } else {
    const auto draw = growth.rng->sample_without_replacement(
        static_cast<std::size_t>(d), static_cast<std::size_t>(growth.mtry));
    storage.assign(draw.begin(), draw.end());
    std::sort(storage.begin(), storage.end());
  }
  return storage;
}

}  // namespace

const TreeNode& ClassificationTree::leaf_for(const Eigen::RowVectorXd& x) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(i)];
    i = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(i)];
}

Eigen::RowVectorXd ClassificationTree::leaf_probability(const Eigen::RowVectorXd& x) const {
  const TreeNode& leaf = leaf_for(x);
  Eigen::RowVectorXd p(kNumModes);
  double total = 0.0;
  for (double c : leaf.counts) total += c;
  for (int c = 0; c < kNumModes; ++c) p[c] = leaf.counts[static_cast<std::size_t>(c)] / total;
  return p;
}

int ClassificationTree::depth() const {
  // nodes are laid out parent-before-children, so one forward pass suffices
  std::vector<int> depth_of(nodes.size(), 0);
  int max_depth = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& nd = nodes[i];
    max_depth = std::max(max_depth, depth_of[i]);
    if (nd.feature >= 0) {
      depth_of[static_cast<std::size_t>(nd.left)] = depth_of[i] + 1;
      depth_of[static_cast<std::size_t>(nd.right)] = depth_of[i] + 1;
    }
  }
  return max_depth;
}

int ClassificationTree::internal_node_count() const {
  int n = 0;
  for (const TreeNode& nd : nodes) n += nd.feature >= 0 ? 1 : 0;
  return n;
}

double RegressionTree::value_for(const Eigen::RowVectorXd& x) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const RegressionTreeNode& nd = nodes[static_cast<std::size_t>(i)];
    i = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

ClassificationTree grow_classification_tree(const Eigen::MatrixXd& X,
                                            const std::vector<int>& instance_rows,
                                            const std::vector<int>& labels,
                                            const Eigen::VectorXd& instance_weights,
                                            const TreeGrowth& growth) {
  const int n = static_cast<int>(instance_rows.size());
  const int d = static_cast<int>(X.cols());
  ClassificationTree tree;
  tree.importance_raw.assign(static_cast<std::size_t>(d), 0.0);

  auto sorted = presort_features(X, instance_rows);
  std::vector<char> goes_left(static_cast<std::size_t>(n));
  std::vector<int> scratch(static_cast<std::size_t>(n));
  std::vector<int> mtry_storage;

  const auto label_of = [&](int inst) {
    return labels[static_cast<std::size_t>(instance_rows[static_cast<std::size_t>(inst)])];
  };

  ClsStats root;
  for (int i = 0; i < n; ++i) root.add(label_of(i), instance_weights[i]);

  struct Pending {
    int node;
    int begin, end;
    int depth;
    ClsStats stats;
  };
  std::vector<Pending> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, 0, n, 0, root});

  while (!stack.empty()) {
    Pending nd = std::move(stack.back());
    stack.pop_back();

    const bool splittable = nd.stats.count >= growth.min_samples_split &&
                            (growth.max_depth < 0 || nd.depth < growth.max_depth) &&
                            !nd.stats.pure();
    FoundSplit best;
    if (splittable) {
      const double parent_gini = nd.stats.gini();
      for (int f : candidate_features(growth, d, mtry_storage)) {
        const auto& idx = sorted[static_cast<std::size_t>(f)];
        ClsStats left;
        for (int s = nd.begin; s + 1 < nd.end; ++s) {
          const int inst = idx[static_cast<std::size_t>(s)];
          left.add(label_of(inst), instance_weights[inst]);
          const double v = X(instance_rows[static_cast<std::size_t>(inst)], f);
          const double v_next =
              X(instance_rows[static_cast<std::size_t>(idx[static_cast<std::size_t>(s + 1)])], f);
          if (!(v_next > v)) continue;
          const ClsStats right = subtract(nd.stats, left);
          const double decrease = parent_gini - (left.total / nd.stats.total) * left.gini() -
                                  (right.total / nd.stats.total) * right.gini();
          if (decrease > best.score) {
            best.valid = true;
            best.feature = f;
            best.threshold = split_threshold(v, v_next);
            best.score = decrease;
            best.importance = nd.stats.total * decrease;
            best.left_count = s + 1 - nd.begin;
            best.cls_left = left;
            best.cls_right = right;
          }
        }
      }
    }

    if (!best.valid) {
      TreeNode& leaf = tree.nodes[static_cast<std::size_t>(nd.node)];
      leaf.feature = -1;
      leaf.counts = nd.stats.w;
      continue;
    }

    const auto& widx = sorted[static_cast<std::size_t>(best.feature)];
    for (int s = nd.begin; s < nd.end; ++s) {
      const int inst = widx[static_cast<std::size_t>(s)];
      goes_left[static_cast<std::size_t>(inst)] =
          X(instance_rows[static_cast<std::size_t>(inst)], best.feature) <= best.threshold;
    }
    partition_slices(sorted, nd.begin, nd.end, goes_left, scratch);
    tree.importance_raw[static_cast<std::size_t>(best.feature)] += best.importance;

    const int li = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int ri = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode& inner = tree.nodes[static_cast<std::size_t>(nd.node)];
    inner.feature = best.feature;
    inner.threshold = best.threshold;
    inner.left = li;
    inner.right = ri;

    const int mid = nd.begin + best.left_count;
    stack.push_back({ri, mid, nd.end, nd.depth + 1, best.cls_right});
    stack.push_back({li, nd.begin, mid, nd.depth + 1, best.cls_left});
  }
  return tree;
}

RegressionTree grow_regression_tree(const Eigen::MatrixXd& X,
                                    const std::vector<int>& instance_rows,
                                    const Eigen::VectorXd& targets,
                                    const Eigen::VectorXd& hessians,
                                    const Eigen::VectorXd& instance_weights,
                                    const TreeGrowth& growth, double leaf_scale,
                                    std::vector<int>* leaf_of_instance) {
  const int n = static_cast<int>(instance_rows.size());
  const int d = static_cast<int>(X.cols());
  RegressionTree tree;
  tree.importance_raw.assign(static_cast<std::size_t>(d), 0.0);
  if (leaf_of_instance != nullptr) leaf_of_instance->assign(static_cast<std::size_t>(n), 0);

  auto sorted = presort_features(X, instance_rows);
  std::vector<char> goes_left(static_cast<std::size_t>(n));
  std::vector<int> scratch(static_cast<std::size_t>(n));
  std::vector<int> mtry_storage;

  const auto row_of = [&](int inst) { return instance_rows[static_cast<std::size_t>(inst)]; };

  RegStats root;
  for (int i = 0; i < n; ++i)
    root.add(instance_weights[i], targets[row_of(i)], hessians[row_of(i)]);

  struct Pending {
    int node;
    int begin, end;
    int depth;
    RegStats stats;
  };
  std::vector<Pending> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, 0, n, 0, root});

  while (!stack.empty()) {
    Pending nd = std::move(stack.back());
    stack.pop_back();

    const bool splittable = nd.stats.count >= growth.min_samples_split &&
                            (growth.max_depth < 0 || nd.depth < growth.max_depth);
    FoundSplit best;
    const double parent_proxy = nd.stats.proxy();
    if (splittable) {
      for (int f : candidate_features(growth, d, mtry_storage)) {
        const auto& idx = sorted[static_cast<std::size_t>(f)];
        RegStats left;
        for (int s = nd.begin; s + 1 < nd.end; ++s) {
          const int inst = idx[static_cast<std::size_t>(s)];
          left.add(instance_weights[inst], targets[row_of(inst)], hessians[row_of(inst)]);
          const double v = X(row_of(inst), f);
          const double v_next = X(row_of(idx[static_cast<std::size_t>(s + 1)]), f);
          if (!(v_next > v)) continue;
          const RegStats right = subtract(nd.stats, left);
          const double score = left.proxy() + right.proxy();
          const double cmp = best.valid ? best.score : parent_proxy;
          if (score > cmp) {
            best.valid = true;
            best.feature = f;
            best.threshold = split_threshold(v, v_next);
            best.score = score;
            best.importance = score - parent_proxy;  // == SSE_parent - SSE_children
            best.left_count = s + 1 - nd.begin;
            best.reg_left = left;
            best.reg_right = right;
          }
        }
      }
    }

    if (!best.valid) {
      RegressionTreeNode& leaf = tree.nodes[static_cast<std::size_t>(nd.node)];
      leaf.feature = -1;
      leaf.value = nd.stats.swh > 1e-150 ? leaf_scale * nd.stats.swt / nd.stats.swh : 0.0;
      if (leaf_of_instance != nullptr) {
        const auto& idx = sorted[0];
        for (int s = nd.begin; s < nd.end; ++s)
          (*leaf_of_instance)[static_cast<std::size_t>(idx[static_cast<std::size_t>(s)])] =
              nd.node;
      }
      continue;
    }

    const auto& widx = sorted[static_cast<std::size_t>(best.feature)];
    for (int s = nd.begin; s < nd.end; ++s) {
      const int inst = widx[static_cast<std::size_t>(s)];
      goes_left[static_cast<std::size_t>(inst)] = X(row_of(inst), best.feature) <= best.threshold;
    }
    partition_slices(sorted, nd.begin, nd.end, goes_left, scratch);
    tree.importance_raw[static_cast<std::size_t>(best.feature)] += best.importance;

    const int li = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int ri = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    RegressionTreeNode& inner = tree.nodes[static_cast<std::size_t>(nd.node)];
    inner.feature = best.feature;
    inner.threshold = best.threshold;
    inner.left = li;
    inner.right = ri;

    const int mid = nd.begin + best.left_count;
    stack.push_back({ri, mid, nd.end, nd.depth + 1, best.reg_right});
    stack.push_back({li, nd.begin, mid, nd.depth + 1, best.reg_left});
  }
  return tree;
}

std::optional<SplitCandidate> best_split(const Eigen::MatrixXd& X, const std::vector<int>& rows,
                                         const std::vector<int>& candidate_features,
                                         const std::vector<int>& labels,
                                         const Eigen::VectorXd& weights) {
  if (rows.empty()) throw ValidationError("best_split: no rows");
  std::vector<int> features = candidate_features;
  std::sort(features.begin(), features.end());

  ClsStats parent;
  for (int r : rows) parent.add(labels[static_cast<std::size_t>(r)], weights[r]);
  if (parent.pure()) return std::nullopt;
  const double parent_gini = parent.gini();

  SplitCandidate best;
  bool found = false;
  std::vector<int> order(rows.size());
  for (int f : features) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double va = X(rows[static_cast<std::size_t>(a)], f);
      const double vb = X(rows[static_cast<std::size_t>(b)], f);
      if (va != vb) return va < vb;
      return a < b;
    });
    ClsStats left;
    for (std::size_t s = 0; s + 1 < order.size(); ++s) {
      const int r = rows[static_cast<std::size_t>(order[s])];
      left.add(labels[static_cast<std::size_t>(r)], weights[r]);
      const double v = X(r, f);
      const double v_next = X(rows[static_cast<std::size_t>(order[s + 1])], f);
      if (!(v_next > v)) continue;
      const ClsStats right = subtract(parent, left);
      const double decrease = parent_gini - (left.total / parent.total) * left.gini() -
                              (right.total / parent.total) * right.gini();
      if (decrease > best.gini_decrease) {
        found = true;
        best.feature = f;
        best.threshold = split_threshold(v, v_next);
        best.gini_decrease = decrease;
      }
    }
  }
  if (!found) return std::nullopt;
  return best;
}

// --- CART model ---------------------------------------------------------------

CartModel::CartModel(ClassificationTree tree, CartConfig config,
                     std::array<bool, kNumModes> class_present, std::uint64_t seed,
                     Eigen::Index train_samples, Eigen::Index feature_count)
    : Model(Family::kCart, feature_count, seed, train_samples, class_present),
      tree_(std::move(tree)),
      config_(config) {}

Eigen::MatrixXd CartModel::predict_proba_impl(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd proba(X.rows(), kNumModes);
  for (Eigen::Index i = 0; i < X.rows(); ++i) proba.row(i) = tree_.leaf_probability(X.row(i));
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
      nodes.push_back(json{{"f", nd.feature}, {"t", nd.threshold}, {"l", nd.left}, {"r", nd.right}});
  }
  return json{{"nodes", std::move(nodes)}, {"importance_raw", tree.importance_raw}};
}

}  // namespace

std::string CartModel::params_json() const {
  json j;
  j["tree"] = classification_tree_to_json(tree_);
  j["max_depth"] = config_.max_depth;
  j["min_samples_split"] = config_.min_samples_split;
  return j.dump();
}

std::shared_ptr<CartModel> fit_cart(const EncodedDataset& data, const CartConfig& config,
                                    std::uint64_t seed) {
  data.validate();
  const EncodedDataset d = data.subset(canonical_row_order(data));
  const int n = static_cast<int>(d.size());
  std::vector<int> instances(static_cast<std::size_t>(n));
  std::iota(instances.begin(), instances.end(), 0);
  TreeGrowth growth;
  growth.max_depth = config.max_depth;
  growth.min_samples_split = config.min_samples_split;
  ClassificationTree tree =
      grow_classification_tree(d.features, instances, d.labels, d.weights, growth);
  return std::make_shared<CartModel>(std::move(tree), config, classes_present(d.labels), seed,
                                     d.size(), d.feature_count());
}

}  // namespace freightbench
