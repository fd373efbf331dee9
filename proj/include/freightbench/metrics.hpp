#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "freightbench/dataset.hpp"

namespace freightbench {

// Weighted confusion counts: entry (i, j) is the total sample weight of
// true-class-i rows predicted as class j.
struct ConfusionMatrix {
  Eigen::Matrix<double, kNumModes, kNumModes> counts =
      Eigen::Matrix<double, kNumModes, kNumModes>::Zero();

  double total() const { return counts.sum(); }
};

// Weighted accuracy plus per-mode precision/recall/F1. Classes that were
// never predicted get precision 0 with precision_defined unset; classes with
// zero true support get NaN recall/F1 with the matching flag unset — callers
// render those as explicit "undefined" markers, never as silent zeros.
struct MetricsReport {
  double accuracy = 0.0;
  std::array<double, kNumModes> precision{};
  std::array<bool, kNumModes> precision_defined{};
  std::array<double, kNumModes> recall{};
  std::array<bool, kNumModes> recall_defined{};
  std::array<double, kNumModes> f1{};
  std::array<bool, kNumModes> f1_defined{};
  std::array<double, kNumModes> support{};  // per-class true weight
  ConfusionMatrix confusion;
};

MetricsReport compute_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                              const Eigen::VectorXd& weights);

double weighted_accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                         const Eigen::VectorXd& weights);

}  // namespace freightbench
