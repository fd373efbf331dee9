#include "freightbench/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "freightbench/errors.hpp"

namespace freightbench {

MetricsReport compute_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                              const Eigen::VectorXd& weights) {
  if (y_true.size() != y_pred.size() ||
      static_cast<Eigen::Index>(y_true.size()) != weights.size())
    throw ShapeError("compute_metrics: y_true, y_pred and weights lengths disagree");
  if (y_true.empty()) throw ShapeError("compute_metrics: empty inputs");

  MetricsReport report;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if (t < 0 || t >= kNumModes || p < 0 || p >= kNumModes)
      throw ShapeError("compute_metrics: label out of range at position " + std::to_string(i));
    const double w = weights[static_cast<Eigen::Index>(i)];
    if (!(w > 0.0)) throw ShapeError("compute_metrics: non-positive weight at position " +
                                     std::to_string(i));
    report.confusion.counts(t, p) += w;
  }

  const double total = report.confusion.total();
  report.accuracy = report.confusion.counts.trace() / total;

  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  for (int c = 0; c < kNumModes; ++c) {
    const std::size_t ci = static_cast<std::size_t>(c);
    const double predicted = report.confusion.counts.col(c).sum();
    const double actual = report.confusion.counts.row(c).sum();
    const double hit = report.confusion.counts(c, c);
    report.support[ci] = actual;

    report.precision_defined[ci] = predicted > 0.0;
    report.precision[ci] = predicted > 0.0 ? hit / predicted : 0.0;  // 0-with-flag convention

    report.recall_defined[ci] = actual > 0.0;
    report.recall[ci] = actual > 0.0 ? hit / actual : kNaN;

    if (actual > 0.0) {
      report.f1_defined[ci] = true;
      const double pr = report.precision[ci] + report.recall[ci];
      report.f1[ci] = pr > 0.0 ? 2.0 * report.precision[ci] * report.recall[ci] / pr : 0.0;
    } else {
      report.f1_defined[ci] = false;
      report.f1[ci] = kNaN;
    }
  }
  return report;
}

double weighted_accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                         const Eigen::VectorXd& weights) {
  if (y_true.size() != y_pred.size() ||
      static_cast<Eigen::Index>(y_true.size()) != weights.size())
    throw ShapeError("weighted_accuracy: input lengths disagree");
  double correct = 0.0, total = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double w = weights[static_cast<Eigen::Index>(i)];
    total += w;
    if (y_true[i] == y_pred[i]) correct += w;
  }
  return correct / total;
}

}  // namespace freightbench
