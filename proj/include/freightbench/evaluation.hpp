#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "freightbench/learner.hpp"
#include "freightbench/metrics.hpp"

namespace freightbench {

struct HoldoutSplit {
  EncodedDataset train;
  EncodedDataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

// Unstratified seeded split; the test side gets round(test_ratio * N) rows.
HoldoutSplit holdout_split(const EncodedDataset& data, double test_ratio, std::uint64_t seed);

struct FoldAssignment {
  std::vector<int> fold_of;  // length n, values in 0..k-1
  int k = 0;

  std::vector<std::vector<std::size_t>> fold_indices() const;
};

// Seeded permutation chopped into k near-equal folds (sizes differ by <= 1).
FoldAssignment kfold_partition(std::size_t n, int k, std::uint64_t seed);

struct CrossValidation {
  std::vector<double> fold_accuracy;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n-1)
};

// Per-fold weighted accuracy: fit on the other k-1 folds, score the held-out
// fold. The fold model never sees its own fold's rows (asserted structurally).
// weights_in_fit=false feeds unit weights to fit while keeping weighted
// evaluation, for sensitivity checks.
CrossValidation cross_validate(const LearnerSpec& spec, const EncodedDataset& train, int k,
                               std::uint64_t seed, bool weights_in_fit = true);

// Same protocol with an arbitrary fit+predict routine; the test-side oracle
// hooks in here.
using FitPredictFn =
    std::function<std::vector<int>(const EncodedDataset& fold_train, const Eigen::MatrixXd& x)>;
CrossValidation cross_validate_with(const FitPredictFn& fit_predict, const EncodedDataset& train,
                                    int k, std::uint64_t seed);

// --- experiment grid ----------------------------------------------------------

struct GridCellKey {
  Family family = Family::kCart;
  double ratio = 0.3;
  int fold_count = 10;
  std::size_t sample_size = 0;
};

struct GridCellResult {
  GridCellKey key;
  bool ok = false;
  std::string error;
  CrossValidation cv;
  MetricsReport test_metrics;
  std::uint64_t cell_seed = 0;
  double wall_seconds = 0.0;
};

struct GridConfig {
  std::vector<Family> families;
  std::vector<double> ratios;
  std::vector<int> fold_counts;
  std::vector<std::size_t> sample_sizes;
  std::map<Family, HyperParams> hyperparameters;  // per-family overrides
  std::uint64_t master_seed = 0;
  int workers = 1;
  bool weights_in_fit = true;
};

// One cell per (family, ratio, fold count, sample size): subsample, holdout,
// cross-validate the training side, refit on the full training side, score
// the held-out test side. Every seed derives from (master_seed, cell index),
// so reruns are identical regardless of worker count. Cells that cannot run
// (e.g. sample_size exceeding the source) are recorded as errors and the grid
// continues. The sink receives results in canonical cell order.
using GridSink = std::function<void(const GridCellResult&)>;
std::vector<GridCellResult> run_experiment_grid(const GridConfig& config,
                                                const EncodedDataset& source,
                                                const GridSink& sink = nullptr);

// Fit + test-side metrics for one already-split dataset, shared by the grid
// and the single-model command.
GridCellResult evaluate_cell(const LearnerSpec& spec, const EncodedDataset& data, double ratio,
                             int fold_count, std::uint64_t cell_seed, bool weights_in_fit);

}  // namespace freightbench
