#include <doctest.h>

#include <cmath>
#include <sstream>

#include "freightbench/dataset.hpp"
#include "freightbench/errors.hpp"
#include "freightbench/schema.hpp"
#include "freightbench/synthetic.hpp"

using namespace freightbench;

namespace {

ShipmentRecord basic_record() {
  ShipmentRecord r;
  r.mode = ModeClass::kParcelService;
  r.size_lb = 12.0;
  r.value_usd = 450.0;
  r.distance_mi = 320.0;
  r.weight = 1.5;
  return r;
}

}  // namespace

TEST_CASE("mode consolidation follows the five-way grouping") {
  const SchemaRegistry reg = SchemaRegistry::defaults();
  CHECK(reg.consolidate_mode("rail") == ModeClass::kOther);
  CHECK(reg.consolidate_mode("water") == ModeClass::kOther);
  CHECK(reg.consolidate_mode("pipeline") == ModeClass::kOther);
  CHECK(reg.consolidate_mode("private_truck") == ModeClass::kPrivateTruck);
  CHECK(reg.consolidate_mode("for_hire_truck") == ModeClass::kForHireTruck);
  CHECK(reg.consolidate_mode("parcel_usps_courier") == ModeClass::kParcelService);
  CHECK(reg.consolidate_mode("air_and_truck") == ModeClass::kAir);
  CHECK(reg.consolidate_mode("truck_and_rail") == ModeClass::kOther);
  CHECK(reg.raw_modes().size() == 21);

  CHECK_THROWS_AS(reg.consolidate_mode("hyperloop"), SchemaError);
  CHECK_THROWS_AS(reg.consolidate_mode(999), SchemaError);
  CHECK_THROWS_AS(reg.consolidate_mode(-1), SchemaError);
}

TEST_CASE("every raw mode lands in a group and all five groups are covered") {
  const SchemaRegistry reg = SchemaRegistry::defaults();
  std::array<int, kNumModes> hits{};
  for (int code = 0; code < 21; ++code)
    hits[static_cast<std::size_t>(reg.consolidate_mode(code))]++;
  for (int m = 0; m < kNumModes; ++m) CHECK(hits[static_cast<std::size_t>(m)] > 0);
}

TEST_CASE("binning boundaries are upper-inclusive") {
  const BinningScheme scheme;
  ShipmentRecord r = basic_record();

  r.size_lb = 30.0;  // "<= 30"
  CHECK(bin_features(r, scheme).size_band == 0);
  r.size_lb = 31.0;
  CHECK(bin_features(r, scheme).size_band == 1);
  r.size_lb = 150.0;  // "31-200"
  CHECK(bin_features(r, scheme).size_band == 1);
  r.size_lb = 1e9;
  CHECK(bin_features(r, scheme).size_band == 6);

  r.distance_mi = 999.0;  // "750-999"
  CHECK(bin_features(r, scheme).distance_band == 4);
  r.distance_mi = 0.0;
  CHECK(bin_features(r, scheme).distance_band == 0);

  r.value_usd = 300.0;  // "<300" is band 0, 300 itself closes band... the label range is inclusive
  CHECK(bin_features(r, scheme).value_band == 0);
  r.value_usd = 300.5;
  CHECK(bin_features(r, scheme).value_band == 1);
  r.value_usd = 1000.0;  // "300-1000"
  CHECK(bin_features(r, scheme).value_band == 1);
}

TEST_CASE("binning is total and monotone") {
  const BinningScheme scheme;
  scheme.validate();
  double prev_band = 0;
  for (double x = 0.0; x < 100000.0; x += 37.7) {
    const int band = band_index(x, scheme.size_bounds);
    CHECK(band >= prev_band);
    CHECK(band >= 0);
    CHECK(band < scheme.size_band_count());
    prev_band = band;
  }
}

TEST_CASE("band counts match the published grouping") {
  const BinningScheme scheme;
  CHECK(scheme.size_band_count() == 7);
  CHECK(scheme.value_band_count() == 4);
  CHECK(scheme.distance_band_count() == 8);
}

TEST_CASE("encode_dataset produces the 20-column design matrix") {
  const BinningScheme scheme;
  std::vector<ShipmentRecord> records = {basic_record()};
  const EncodedDataset data = encode_dataset(records, scheme);
  CHECK(data.features.rows() == 1);
  CHECK(data.features.cols() == 20);
  CHECK(data.feature_names.size() == 20);
  CHECK(data.labels[0] == 2);
  CHECK(data.weights[0] == 1.5);

  // size 12 -> band 0, value 450 -> band 1, distance 320 -> band 2
  CHECK(data.features(0, 0) == 0);
  CHECK(data.features(0, 1) == 1);
  CHECK(data.features(0, 2) == 2);
}

TEST_CASE("records identical except mode encode to identical feature rows") {
  ShipmentRecord a = basic_record();
  ShipmentRecord b = a;
  b.mode = ModeClass::kAir;
  const EncodedDataset data = encode_dataset({a, b}, BinningScheme{});
  CHECK(data.features.row(0) == data.features.row(1));
  CHECK(data.labels[0] != data.labels[1]);
}

TEST_CASE("encode_dataset rejects empty input") {
  CHECK_THROWS_AS(encode_dataset({}, BinningScheme{}), DataError);
}

TEST_CASE("weighted_mode_shares is a probability vector") {
  ShipmentRecord a = basic_record();
  a.mode = ModeClass::kForHireTruck;
  a.weight = 1.0;
  ShipmentRecord b = basic_record();
  b.mode = ModeClass::kPrivateTruck;
  b.weight = 3.0;
  const EncodedDataset data = encode_dataset({a, b}, BinningScheme{});
  const auto shares = weighted_mode_shares(data);
  CHECK(shares[0] == doctest::Approx(0.25));
  CHECK(shares[1] == doctest::Approx(0.75));
  double total = 0.0;
  for (double s : shares) total += s;
  CHECK(std::abs(total - 1.0) < 1e-9);
}

TEST_CASE("single-mode data concentrates the share") {
  ShipmentRecord a = basic_record();
  const EncodedDataset data = encode_dataset({a, a, a}, BinningScheme{});
  const auto shares = weighted_mode_shares(data);
  CHECK(shares[2] == doctest::Approx(1.0));
  CHECK(shares[0] == 0.0);
}

TEST_CASE("ingest_table round-trips synthetic output") {
  const SchemaRegistry reg = SchemaRegistry::defaults();
  SyntheticSpec spec;
  spec.n_records = 50;
  spec.seed = 7;
  const auto records = generate_synthetic(spec);

  std::ostringstream out;
  write_table(out, records, reg);
  std::istringstream in(out.str());
  const auto back = ingest_table(in, reg);

  REQUIRE(back.size() == records.size());
  const EncodedDataset a = encode_dataset(records, BinningScheme{});
  const EncodedDataset b = encode_dataset(back, BinningScheme{});
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(a.weights == b.weights);
}

TEST_CASE("ingest_table errors carry row and column locations") {
  const SchemaRegistry reg = SchemaRegistry::defaults();

  SUBCASE("missing column") {
    std::istringstream in("mode,size_lb\nparcel_service,1\n");
    CHECK_THROWS_WITH_AS(ingest_table(in, reg),
                         doctest::Contains("missing column 'value_usd'"), SchemaError);
  }
  SUBCASE("header only is fine, no records") {
    std::ostringstream header;
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) header << (i ? "," : "") << cols[i];
    std::istringstream in(header.str() + "\n");
    CHECK(ingest_table(in, reg).empty());
  }
  SUBCASE("negative distance is rejected with its row") {
    const SchemaRegistry r2 = SchemaRegistry::defaults();
    SyntheticSpec spec;
    spec.n_records = 2;
    spec.seed = 3;
    auto records = generate_synthetic(spec);
    std::ostringstream out;
    write_table(out, records, r2);
    std::string text = out.str();
    // corrupt row 2's distance by splicing in a negative value
    std::istringstream lines(text);
    std::string header, row1, row2;
    std::getline(lines, header);
    std::getline(lines, row1);
    std::getline(lines, row2);
    // distance_mi is the 4th column
    std::size_t pos = 0;
    for (int c = 0; c < 3; ++c) pos = row2.find(',', pos) + 1;
    const std::size_t end = row2.find(',', pos);
    row2 = row2.substr(0, pos) + "-5" + row2.substr(end);
    std::istringstream in(header + "\n" + row1 + "\n" + row2 + "\n");
    CHECK_THROWS_WITH_AS(ingest_table(in, reg), doctest::Contains("row 2"), ValidationError);
  }
  SUBCASE("out-of-vocabulary categorical") {
    SyntheticSpec spec;
    spec.n_records = 1;
    spec.seed = 3;
    auto records = generate_synthetic(spec);
    std::ostringstream out;
    write_table(out, records, reg);
    std::string text = out.str();
    const std::size_t pos = text.find("cfs_");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 7, "cfs_999");
    std::istringstream in(text);
    CHECK_THROWS_AS(ingest_table(in, reg), ValidationError);
  }
  SUBCASE("unknown column is rejected") {
    std::ostringstream header;
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) header << (i ? "," : "") << cols[i];
    header << ",mystery";
    std::istringstream in(header.str() + "\n");
    CHECK_THROWS_WITH_AS(ingest_table(in, reg), doctest::Contains("mystery"), SchemaError);
  }
}

TEST_CASE("registry file round-trip preserves vocabularies") {
  const SchemaRegistry reg = SchemaRegistry::defaults();
  const SchemaRegistry back = SchemaRegistry::from_json_text(reg.to_json_text());
  CHECK(back.raw_modes() == reg.raw_modes());
  CHECK(back.commodities() == reg.commodities());
  CHECK(back.cfs_areas() == reg.cfs_areas());
  CHECK(back.consolidate_mode("rail") == ModeClass::kOther);
}

TEST_CASE("generate_synthetic is deterministic and calibrated") {
  SyntheticSpec spec;
  spec.n_records = 20000;
  spec.seed = 11;

  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  REQUIRE(a.size() == b.size());
  const EncodedDataset ea = encode_dataset(a, BinningScheme{});
  const EncodedDataset eb = encode_dataset(b, BinningScheme{});
  CHECK(ea.features == eb.features);  // byte-identical record lists
  CHECK(ea.weights == eb.weights);

  SUBCASE("weighted shares approach the target") {
    const auto shares = weighted_mode_shares(ea);
    for (int m = 0; m < kNumModes; ++m)
      CHECK(std::abs(shares[static_cast<std::size_t>(m)] -
                     spec.target_mode_shares[static_cast<std::size_t>(m)]) < 0.02);
  }
}

TEST_CASE("equal target shares come out near 0.2 each") {
  SyntheticSpec spec;
  spec.n_records = 50000;
  spec.seed = 5;
  spec.target_mode_shares = {0.2, 0.2, 0.2, 0.2, 0.2};
  const EncodedDataset data = encode_dataset(generate_synthetic(spec), BinningScheme{});
  for (double s : weighted_mode_shares(data)) CHECK(std::abs(s - 0.2) < 0.01);
}

TEST_CASE("generate_synthetic rejects bad specs") {
  SyntheticSpec spec;
  spec.n_records = 0;
  CHECK_THROWS_AS(generate_synthetic(spec), ValidationError);
  spec.n_records = 10;
  spec.target_mode_shares = {0.5, 0.5, 0.5, 0.0, 0.0};
  CHECK_THROWS_AS(generate_synthetic(spec), ValidationError);
  spec.target_mode_shares = {0.2, 0.2, 0.2, 0.2, 0.2};
  spec.noise_level = 1.5;
  CHECK_THROWS_AS(generate_synthetic(spec), ValidationError);
}

TEST_CASE("share error decays with n") {
  // |empirical - target| at n=200000 <= at n=2000, majority over 10 seeds
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SyntheticSpec small;
    small.n_records = 2000;
    small.seed = seed;
    SyntheticSpec large = small;
    large.n_records = 200000;
    const auto shares_small =
        weighted_mode_shares(encode_dataset(generate_synthetic(small), BinningScheme{}));
    const auto shares_large =
        weighted_mode_shares(encode_dataset(generate_synthetic(large), BinningScheme{}));
    double err_small = 0.0, err_large = 0.0;
    for (int m = 0; m < kNumModes; ++m) {
      err_small += std::abs(shares_small[static_cast<std::size_t>(m)] -
                            small.target_mode_shares[static_cast<std::size_t>(m)]);
      err_large += std::abs(shares_large[static_cast<std::size_t>(m)] -
                            large.target_mode_shares[static_cast<std::size_t>(m)]);
    }
    if (err_large <= err_small) ++improved;
  }
  CHECK(improved >= 6);
}

TEST_CASE("canonical_row_order is stable under permutation") {
  SyntheticSpec spec;
  spec.n_records = 100;
  spec.seed = 23;
  const EncodedDataset data = encode_dataset(generate_synthetic(spec), BinningScheme{});

  std::vector<std::size_t> reversed(100);
  for (std::size_t i = 0; i < 100; ++i) reversed[i] = 99 - i;
  const EncodedDataset shuffled = data.subset(reversed);

  const EncodedDataset a = data.subset(canonical_row_order(data));
  const EncodedDataset b = shuffled.subset(canonical_row_order(shuffled));
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(a.weights == b.weights);
}
