#include "freightbench/evaluation.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <thread>

#include "freightbench/errors.hpp"
#include "freightbench/rng.hpp"

namespace freightbench {

HoldoutSplit holdout_split(const EncodedDataset& data, double test_ratio, std::uint64_t seed) {
  data.validate();
  if (!(test_ratio > 0.0 && test_ratio < 1.0))
    throw ValidationError("holdout_split: ratio must lie in (0, 1)");
  const std::size_t n = static_cast<std::size_t>(data.size());
  if (n < 2) throw ValidationError("holdout_split: need at least two rows");
  const std::size_t n_test =
      static_cast<std::size_t>(std::llround(test_ratio * static_cast<double>(n)));
  if (n_test < 1 || n_test >= n)
    throw ValidationError("holdout_split: degenerate split sizes for ratio " +
                          std::to_string(test_ratio));

  Rng rng(derive_seed(seed, {0x484f4c44u}));
  std::vector<std::size_t> perm = rng.permutation(n);
  HoldoutSplit split;
  split.test_indices.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train_indices.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  split.train = data.subset(split.train_indices);
  split.test = data.subset(split.test_indices);
  return split;
}

std::vector<std::vector<std::size_t>> FoldAssignment::fold_indices() const {
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    folds[static_cast<std::size_t>(fold_of[i])].push_back(i);
  return folds;
}

FoldAssignment kfold_partition(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("kfold_partition: k must be >= 2");
  if (static_cast<std::size_t>(k) > n)
    throw ValidationError("kfold_partition: k=" + std::to_string(k) + " exceeds n=" +
                          std::to_string(n));
  Rng rng(derive_seed(seed, {0x464f4c44u}));
  const std::vector<std::size_t> perm = rng.permutation(n);

  FoldAssignment assignment;
  assignment.k = k;
  assignment.fold_of.assign(n, 0);
  // the first (n mod k) folds take one extra row
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j)
      assignment.fold_of[perm[pos++]] = f;
  }
  return assignment;
}

namespace {

CrossValidation summarize(std::vector<double> fold_accuracy) {
  CrossValidation cv;
  cv.fold_accuracy = std::move(fold_accuracy);
  const double k = static_cast<double>(cv.fold_accuracy.size());
  for (double a : cv.fold_accuracy) cv.mean += a;
  cv.mean /= k;
  if (cv.fold_accuracy.size() > 1) {
    double ss = 0.0;
    for (double a : cv.fold_accuracy) ss += (a - cv.mean) * (a - cv.mean);
    cv.stddev = std::sqrt(ss / (k - 1.0));
  }
  return cv;
}

CrossValidation cross_validate_impl(const FitPredictFn& fit_predict, const EncodedDataset& train,
                                    int k, std::uint64_t seed) {
  train.validate();
  const std::size_t n = static_cast<std::size_t>(train.size());
  const FoldAssignment assignment = kfold_partition(n, k, seed);
  const auto folds = assignment.fold_indices();

  std::vector<double> accs;
  accs.reserve(static_cast<std::size_t>(k));
  std::vector<char> in_fold(n);
  for (int f = 0; f < k; ++f) {
    const auto& eval_idx = folds[static_cast<std::size_t>(f)];
    std::fill(in_fold.begin(), in_fold.end(), 0);
    for (std::size_t i : eval_idx) in_fold[i] = 1;
    std::vector<std::size_t> fit_idx;
    fit_idx.reserve(n - eval_idx.size());
    for (std::size_t i = 0; i < n; ++i)
      if (!in_fold[i]) fit_idx.push_back(i);

    // structural no-leakage check: fit rows and eval rows never overlap
    for (std::size_t i : fit_idx)
      if (in_fold[i]) throw DataError("cross_validate: fold leakage detected");
    if (fit_idx.size() + eval_idx.size() != n)
      throw DataError("cross_validate: folds do not cover the dataset");
    if (fit_idx.empty())
      throw ValidationError("cross_validate: fold " + std::to_string(f) +
                            " leaves no training rows");

    const EncodedDataset fold_train = train.subset(fit_idx);
    const EncodedDataset fold_eval = train.subset(eval_idx);
    try {
      const std::vector<int> pred = fit_predict(fold_train, fold_eval.features);
      accs.push_back(weighted_accuracy(fold_eval.labels, pred, fold_eval.weights));
    } catch (const ValidationError& e) {
      throw ValidationError("fold " + std::to_string(f) + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("fold " + std::to_string(f) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("fold " + std::to_string(f) + ": " + e.what());
    }
  }
  return summarize(std::move(accs));
}

EncodedDataset with_unit_weights(const EncodedDataset& data) {
  EncodedDataset d = data;
  d.weights.setOnes();
  return d;
}

}  // namespace

CrossValidation cross_validate_with(const FitPredictFn& fit_predict, const EncodedDataset& train,
                                    int k, std::uint64_t seed) {
  return cross_validate_impl(fit_predict, train, k, seed);
}

CrossValidation cross_validate(const LearnerSpec& spec, const EncodedDataset& train, int k,
                               std::uint64_t seed, bool weights_in_fit) {
  spec.validate();
  return cross_validate_impl(
      [&](const EncodedDataset& fold_train, const Eigen::MatrixXd& x) {
        const FittedModel model =
            weights_in_fit ? fit(spec, fold_train) : fit(spec, with_unit_weights(fold_train));
        return model->predict(x);
      },
      train, k, seed);
}

GridCellResult evaluate_cell(const LearnerSpec& spec, const EncodedDataset& data, double ratio,
                             int fold_count, std::uint64_t cell_seed, bool weights_in_fit) {
  GridCellResult result;
  result.key = {spec.family, ratio, fold_count, static_cast<std::size_t>(data.size())};
  result.cell_seed = cell_seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    const HoldoutSplit split = holdout_split(data, ratio, derive_seed(cell_seed, {1}));
    result.cv = cross_validate(spec, split.train, fold_count, derive_seed(cell_seed, {2}),
                               weights_in_fit);
    const FittedModel model =
        weights_in_fit ? fit(spec, split.train) : fit(spec, with_unit_weights(split.train));
    result.test_metrics =
        compute_metrics(split.test.labels, model->predict(split.test.features), split.test.weights);
    result.ok = true;
  } catch (const std::exception& e) {
    result.ok = false;
    result.error = e.what();
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<GridCellResult> run_experiment_grid(const GridConfig& config,
                                                const EncodedDataset& source,
                                                const GridSink& sink) {
  source.validate();
  if (config.families.empty() || config.ratios.empty() || config.fold_counts.empty() ||
      config.sample_sizes.empty())
    throw ValidationError("run_experiment_grid: empty grid axis");
  if (config.workers < 1) throw ValidationError("run_experiment_grid: workers must be >= 1");

  struct Cell {
    GridCellKey key;
    std::size_t index;
  };
  std::vector<Cell> cells;
  std::size_t index = 0;
  for (Family family : config.families)
    for (double ratio : config.ratios)
      for (int folds : config.fold_counts)
        for (std::size_t size : config.sample_sizes)
          cells.push_back({{family, ratio, folds, size}, index++});

  const std::size_t n_cells = cells.size();
  std::vector<std::optional<GridCellResult>> done(n_cells);
  std::mutex mu;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};

  const auto run_cell = [&](const Cell& cell) -> GridCellResult {
    const std::uint64_t cell_seed = derive_seed(
        config.master_seed,
        {static_cast<std::uint64_t>(cell.key.family),
         static_cast<std::uint64_t>(std::llround(cell.key.ratio * 1e6)),
         static_cast<std::uint64_t>(cell.key.fold_count), cell.key.sample_size});
    const std::size_t n = static_cast<std::size_t>(source.size());
    if (cell.key.sample_size > n) {
      GridCellResult r;
      r.key = cell.key;
      r.cell_seed = cell_seed;
      r.ok = false;
      r.error = "sample size " + std::to_string(cell.key.sample_size) +
                " exceeds available rows " + std::to_string(n);
      return r;
    }
    EncodedDataset data;
    if (cell.key.sample_size == n) {
      data = source;
    } else {
      Rng rng(derive_seed(cell_seed, {0}));
      data = source.subset(rng.sample_without_replacement(n, cell.key.sample_size));
    }
    LearnerSpec spec = LearnerSpec::defaults(cell.key.family, derive_seed(cell_seed, {3}));
    const auto it = config.hyperparameters.find(cell.key.family);
    if (it != config.hyperparameters.end()) spec.params = it->second;
    GridCellResult r = evaluate_cell(spec, data, cell.key.ratio, cell.key.fold_count, cell_seed,
                                     config.weights_in_fit);
    r.key.sample_size = cell.key.sample_size;
    return r;
  };

  const int n_workers = std::min<int>(config.workers, static_cast<int>(n_cells));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int t = 0; t < n_workers; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n_cells) return;
        GridCellResult r = run_cell(cells[i]);
        {
          std::lock_guard<std::mutex> lock(mu);
          done[i] = std::move(r);
        }
        ready.notify_all();
      }
    });
  }

  // emit strictly in cell order so output is identical for any worker count
  std::vector<GridCellResult> results;
  results.reserve(n_cells);
  {
    std::unique_lock<std::mutex> lock(mu);
    for (std::size_t i = 0; i < n_cells; ++i) {
      ready.wait(lock, [&] { return done[i].has_value(); });
      results.push_back(*done[i]);
      if (sink) sink(results.back());
    }
  }
  for (std::thread& t : pool) t.join();
  return results;
}

}  // namespace freightbench
