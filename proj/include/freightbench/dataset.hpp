#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace freightbench {

// Five-way consolidated shipment mode. Codes are stable and ordered.
enum class ModeClass : int {
  kForHireTruck = 0,
  kPrivateTruck = 1,
  kParcelService = 2,
  kAir = 3,
  kOther = 4,
};

inline constexpr int kNumModes = 5;

const std::array<std::string, kNumModes>& mode_class_names();
ModeClass mode_class_from_code(int code);

// One shipment: the 20 predictor variables, the consolidated mode label and
// the expansion weight. Categorical fields hold integer codes into the schema
// registry vocabularies; booleans are stored as-is.
struct ShipmentRecord {
  ModeClass mode = ModeClass::kForHireTruck;
  double size_lb = 0.0;
  double value_usd = 0.0;
  double distance_mi = 0.0;
  int commodity = 0;
  int hazmat = 0;
  bool temp_controlled = false;
  bool export_shipment = false;
  int origin_cfs = 0;
  int dest_cfs = 0;
  int naics = 0;
  double origin_employee_density = 0.0;
  double origin_warehouse_count = 0.0;
  double origin_highway_density = 0.0;
  double origin_railway_density = 0.0;
  bool origin_temp_over_60f = false;
  double dest_population_density = 0.0;
  bool dest_income_under_50k = false;
  bool dest_temp_over_60f = false;
  double dest_highway_density = 0.0;
  double dest_railway_density = 0.0;
  double weight = 1.0;
};

// Band boundaries for the three continuous shipment attributes. A value x
// falls in band b when bounds[b-1] < x <= bounds[b]; values above the last
// bound take the final band, so banding is total on nonnegative reals.
struct BinningScheme {
  std::vector<double> size_bounds{30, 200, 1000, 5000, 30000, 45000};
  std::vector<double> value_bounds{300, 1000, 5000};
  std::vector<double> distance_bounds{100, 250, 500, 750, 1000, 1500, 2000};

  void validate() const;  // throws ValidationError on non-ascending bounds
  int size_band_count() const { return static_cast<int>(size_bounds.size()) + 1; }
  int value_band_count() const { return static_cast<int>(value_bounds.size()) + 1; }
  int distance_band_count() const { return static_cast<int>(distance_bounds.size()) + 1; }
};

// Upper-inclusive band index for one value against ascending bounds.
int band_index(double value, const std::vector<double>& bounds);

struct BandedRecord {
  int size_band = 0;
  int value_band = 0;
  int distance_band = 0;
};

BandedRecord bin_features(const ShipmentRecord& record, const BinningScheme& scheme);

inline constexpr int kFeatureCount = 20;

// Numeric design matrix: one row per shipment, one column per Table-style
// predictor (bands and categorical codes as integers, densities as-is).
// Immutable by convention once built; safe for concurrent readers.
struct EncodedDataset {
  Eigen::MatrixXd features;           // N x 20
  std::vector<int> labels;            // values in 0..4
  Eigen::VectorXd weights;            // positive
  std::vector<std::string> feature_names;
  std::array<std::string, kNumModes> class_names;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index feature_count() const { return features.cols(); }

  void validate() const;  // throws DataError on any broken invariant
  EncodedDataset subset(const std::vector<std::size_t>& rows) const;
};

// Canonical feature order used by encode_dataset.
const std::vector<std::string>& default_feature_names();

EncodedDataset encode_dataset(const std::vector<ShipmentRecord>& records,
                              const BinningScheme& scheme);

// share_m = (weight with label m) / (total weight); sums to 1.
std::array<double, kNumModes> weighted_mode_shares(const EncodedDataset& data);

// Stable lexicographic order over (features, label, weight). Every fit
// reorders its training rows through this before any seeded work, so trained
// models do not depend on input row order.
std::vector<std::size_t> canonical_row_order(const EncodedDataset& data);

}  // namespace freightbench
