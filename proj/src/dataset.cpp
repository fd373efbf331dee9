#include "freightbench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "freightbench/errors.hpp"

namespace freightbench {

const std::array<std::string, kNumModes>& mode_class_names() {
  static const std::array<std::string, kNumModes> names = {
      "for_hire_truck", "private_truck", "parcel_service", "air", "other"};
  return names;
}

ModeClass mode_class_from_code(int code) {
  if (code < 0 || code >= kNumModes)
    throw ValidationError("mode class code out of range: " + std::to_string(code));
  return static_cast<ModeClass>(code);
}

void BinningScheme::validate() const {
  auto check = [](const std::vector<double>& bounds, const char* name) {
    if (bounds.empty()) throw ValidationError(std::string(name) + ": no bounds");
    for (std::size_t i = 1; i < bounds.size(); ++i)
      if (!(bounds[i - 1] < bounds[i]))
        throw ValidationError(std::string(name) + ": bounds not strictly ascending");
  };
  check(size_bounds, "size_bounds");
  check(value_bounds, "value_bounds");
  check(distance_bounds, "distance_bounds");
}

int band_index(double value, const std::vector<double>& bounds) {
  // Upper-inclusive: x == bounds[b] stays in band b.
  int b = 0;
  for (double bound : bounds) {
    if (value <= bound) return b;
    ++b;
  }
  return b;
}

BandedRecord bin_features(const ShipmentRecord& record, const BinningScheme& scheme) {
  scheme.validate();
  BandedRecord banded;
  banded.size_band = band_index(record.size_lb, scheme.size_bounds);
  banded.value_band = band_index(record.value_usd, scheme.value_bounds);
  banded.distance_band = band_index(record.distance_mi, scheme.distance_bounds);
  return banded;
}

const std::vector<std::string>& default_feature_names() {
  static const std::vector<std::string> names = {
      "size_band",
      "value_band",
      "distance_band",
      "commodity",
      "hazmat",
      "temp_controlled",
      "export",
      "origin_cfs",
      "dest_cfs",
      "naics",
      "origin_employee_density",
      "origin_warehouse_count",
      "origin_highway_density",
      "origin_railway_density",
      "origin_temp_over_60f",
      "dest_population_density",
      "dest_income_under_50k",
      "dest_temp_over_60f",
      "dest_highway_density",
      "dest_railway_density",
  };
  return names;
}

void EncodedDataset::validate() const {
  const Eigen::Index n = features.rows();
  if (n < 1) throw DataError("dataset is empty");
  if (static_cast<Eigen::Index>(labels.size()) != n || weights.size() != n)
    throw DataError("features/labels/weights row counts disagree");
  if (static_cast<Eigen::Index>(feature_names.size()) != features.cols())
    throw DataError("feature_names length does not match feature columns");
  if (!features.allFinite()) throw DataError("features contain non-finite entries");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= kNumModes)
      throw DataError("label out of range at row " + std::to_string(i));
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw DataError("non-positive weight at row " + std::to_string(i));
  }
}

EncodedDataset EncodedDataset::subset(const std::vector<std::size_t>& rows) const {
  EncodedDataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.resize(rows.size());
  out.weights.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
    out.labels[i] = labels[rows[i]];
    out.weights[static_cast<Eigen::Index>(i)] = weights[static_cast<Eigen::Index>(rows[i])];
  }
  out.feature_names = feature_names;
  out.class_names = class_names;
  return out;
}

EncodedDataset encode_dataset(const std::vector<ShipmentRecord>& records,
                              const BinningScheme& scheme) {
  if (records.empty()) throw DataError("encode_dataset: no records");
  scheme.validate();

  EncodedDataset data;
  const Eigen::Index n = static_cast<Eigen::Index>(records.size());
  data.features.resize(n, kFeatureCount);
  data.labels.resize(records.size());
  data.weights.resize(n);
  data.feature_names = default_feature_names();
  data.class_names = mode_class_names();

  for (Eigen::Index i = 0; i < n; ++i) {
    const ShipmentRecord& r = records[static_cast<std::size_t>(i)];
    const BandedRecord b = bin_features(r, scheme);
    Eigen::RowVectorXd v(kFeatureCount);
    v << b.size_band, b.value_band, b.distance_band, r.commodity, r.hazmat,
        r.temp_controlled ? 1.0 : 0.0, r.export_shipment ? 1.0 : 0.0, r.origin_cfs,
        r.dest_cfs, r.naics, r.origin_employee_density, r.origin_warehouse_count,
        r.origin_highway_density, r.origin_railway_density,
        r.origin_temp_over_60f ? 1.0 : 0.0, r.dest_population_density,
        r.dest_income_under_50k ? 1.0 : 0.0, r.dest_temp_over_60f ? 1.0 : 0.0,
        r.dest_highway_density, r.dest_railway_density;
    data.features.row(i) = v;
    data.labels[static_cast<std::size_t>(i)] = static_cast<int>(r.mode);
    data.weights[i] = r.weight;
  }
  data.validate();
  return data;
}

std::array<double, kNumModes> weighted_mode_shares(const EncodedDataset& data) {
  data.validate();
  std::array<double, kNumModes> shares{};
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    shares[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(i)])] += data.weights[i];
    total += data.weights[i];
  }
  for (double& s : shares) s /= total;
  return shares;
}

std::vector<std::size_t> canonical_row_order(const EncodedDataset& data) {
  std::vector<std::size_t> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), 0);
  const Eigen::Index d = data.features.cols();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Eigen::Index ia = static_cast<Eigen::Index>(a);
    const Eigen::Index ib = static_cast<Eigen::Index>(b);
    for (Eigen::Index j = 0; j < d; ++j) {
      if (data.features(ia, j) != data.features(ib, j))
        return data.features(ia, j) < data.features(ib, j);
    }
    if (data.labels[a] != data.labels[b]) return data.labels[a] < data.labels[b];
    return data.weights[ia] < data.weights[ib];
  });
  return order;
}

}  // namespace freightbench
