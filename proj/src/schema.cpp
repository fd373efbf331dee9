#include "freightbench/schema.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "freightbench/errors.hpp"
#include "freightbench/format.hpp"

namespace freightbench {
namespace {

using nlohmann::json;

int code_of(const std::vector<std::string>& vocab, const std::string& name,
            const char* vocab_name) {
  const auto it = std::find(vocab.begin(), vocab.end(), name);
  if (it == vocab.end())
    throw SchemaError(std::string(vocab_name) + ": unknown value '" + name + "'");
  return static_cast<int>(it - vocab.begin());
}

std::vector<std::string> numbered(const std::string& prefix, int count, int width) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 1; i <= count; ++i) {
    std::string num = std::to_string(i);
    while (static_cast<int>(num.size()) < width) num.insert(num.begin(), '0');
    out.push_back(prefix + num);
  }
  return out;
}

}  // namespace

SchemaRegistry SchemaRegistry::defaults() {
  SchemaRegistry reg;
  // 21 raw CFS transport modes. Group reading: parcel is its own group, air
  // includes the truck-air combinations, and rail/water/pipeline plus all
  // non-parcel multimodal codes fold into "other". Generic "truck" goes to
  // for-hire; change the registry file if your extract codes it differently.
  const std::vector<std::pair<std::string, std::string>> modes = {
      {"truck", "for_hire_truck"},
      {"for_hire_truck", "for_hire_truck"},
      {"private_truck", "private_truck"},
      {"parcel_usps_courier", "parcel_service"},
      {"air_and_truck", "air"},
      {"truck_and_air", "air"},
      {"rail", "other"},
      {"water", "other"},
      {"inland_water", "other"},
      {"great_lakes_water", "other"},
      {"deep_sea_water", "other"},
      {"pipeline", "other"},
      {"truck_and_rail", "other"},
      {"truck_and_water", "other"},
      {"truck_and_pipeline", "other"},
      {"rail_and_water", "other"},
      {"inland_water_and_great_lakes", "other"},
      {"inland_water_and_deep_sea", "other"},
      {"great_lakes_and_deep_sea", "other"},
      {"non_parcel_multimodal", "other"},
      {"other_mode", "other"},
  };
  for (const auto& [raw, group] : modes) {
    reg.raw_modes_.push_back(raw);
    reg.consolidation_[raw] = group;
  }
  reg.commodities_ = {
      "raw_food",
      "prepared_products",
      "stone_nonmetallic_minerals",
      "petroleum_coal",
      "chemical_products",
      "wood_paper_textiles",
      "metals_machinery",
      "electronics",
      "furniture_others",
  };
  reg.hazmat_levels_ = {"not_hazmat", "class3_hazmat", "other_hazmat"};
  reg.cfs_areas_ = numbered("cfs_", 132, 3);
  reg.naics_classes_ = numbered("naics_", 45, 2);
  return reg;
}

void SchemaRegistry::validate() const {
  if (raw_modes_.size() != 21)
    throw SchemaError("registry must list exactly 21 raw modes, got " +
                      std::to_string(raw_modes_.size()));
  const auto& groups = mode_class_names();
  std::array<bool, kNumModes> covered{};
  for (const auto& raw : raw_modes_) {
    const auto it = consolidation_.find(raw);
    if (it == consolidation_.end())
      throw SchemaError("raw mode '" + raw + "' has no consolidation group");
    const auto git = std::find(groups.begin(), groups.end(), it->second);
    if (git == groups.end())
      throw SchemaError("raw mode '" + raw + "' maps to unknown group '" + it->second + "'");
    covered[static_cast<std::size_t>(git - groups.begin())] = true;
  }
  for (std::size_t m = 0; m < covered.size(); ++m)
    if (!covered[m]) throw SchemaError("no raw mode maps to group '" + groups[m] + "'");
  if (commodities_.empty() || hazmat_levels_.empty() || cfs_areas_.empty() ||
      naics_classes_.empty())
    throw SchemaError("registry has an empty vocabulary");
  if (cfs_areas_.size() > 132) throw SchemaError("more than 132 CFS areas");
  if (naics_classes_.size() > 45) throw SchemaError("more than 45 NAICS classes");
}

ModeClass SchemaRegistry::consolidate_mode(const std::string& raw_mode) const {
  const auto it = consolidation_.find(raw_mode);
  if (it == consolidation_.end())
    throw SchemaError("unregistered raw mode '" + raw_mode + "'");
  const auto& groups = mode_class_names();
  const auto git = std::find(groups.begin(), groups.end(), it->second);
  return static_cast<ModeClass>(git - groups.begin());
}

ModeClass SchemaRegistry::consolidate_mode(int raw_mode_code) const {
  if (raw_mode_code < 0 || raw_mode_code >= static_cast<int>(raw_modes_.size()))
    throw SchemaError("unregistered raw mode code " + std::to_string(raw_mode_code));
  return consolidate_mode(raw_modes_[static_cast<std::size_t>(raw_mode_code)]);
}

int SchemaRegistry::commodity_code(const std::string& name) const {
  return code_of(commodities_, name, "commodity");
}
int SchemaRegistry::hazmat_code(const std::string& name) const {
  return code_of(hazmat_levels_, name, "hazmat");
}
int SchemaRegistry::cfs_area_code(const std::string& name) const {
  return code_of(cfs_areas_, name, "cfs_area");
}
int SchemaRegistry::naics_code(const std::string& name) const {
  return code_of(naics_classes_, name, "naics");
}

std::string SchemaRegistry::to_json_text() const {
  json j;
  j["format"] = "freightbench-registry";
  j["version"] = 1;
  j["raw_modes"] = raw_modes_;
  j["mode_consolidation"] = consolidation_;
  j["commodity"] = commodities_;
  j["hazmat"] = hazmat_levels_;
  j["cfs_areas"] = cfs_areas_;
  j["naics"] = naics_classes_;
  return j.dump(2) + "\n";
}

SchemaRegistry SchemaRegistry::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("registry parse failure: ") + e.what());
  }
  SchemaRegistry reg;
  try {
    j.at("raw_modes").get_to(reg.raw_modes_);
    reg.consolidation_ = j.at("mode_consolidation").get<std::map<std::string, std::string>>();
    j.at("commodity").get_to(reg.commodities_);
    j.at("hazmat").get_to(reg.hazmat_levels_);
    j.at("cfs_areas").get_to(reg.cfs_areas_);
    j.at("naics").get_to(reg.naics_classes_);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("registry field missing or mistyped: ") + e.what());
  }
  reg.validate();
  return reg;
}

SchemaRegistry SchemaRegistry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open registry file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

void SchemaRegistry::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write registry file: " + path);
  out << to_json_text();
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "mode",
      "size_lb",
      "value_usd",
      "distance_mi",
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
      "weight",
  };
  return cols;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string location(std::size_t row, const std::string& column) {
  return "row " + std::to_string(row) + ", column '" + column + "'";
}

double parse_number(const std::string& text, std::size_t row, const std::string& column) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ValidationError(location(row, column) + ": unparseable numeric '" + text + "'");
  if (!std::isfinite(value))
    throw ValidationError(location(row, column) + ": non-finite value");
  return value;
}

double parse_nonnegative(const std::string& text, std::size_t row, const std::string& column) {
  const double v = parse_number(text, row, column);
  if (v < 0.0)
    throw ValidationError(location(row, column) + ": negative value " + text);
  return v;
}

bool parse_flag(const std::string& text, std::size_t row, const std::string& column) {
  if (text == "no") return false;
  if (text == "yes") return true;
  throw ValidationError(location(row, column) + ": expected 'yes' or 'no', got '" + text + "'");
}

ModeClass parse_mode(const std::string& text, const SchemaRegistry& schema, std::size_t row) {
  const auto& groups = mode_class_names();
  const auto it = std::find(groups.begin(), groups.end(), text);
  if (it != groups.end()) return static_cast<ModeClass>(it - groups.begin());
  try {
    return schema.consolidate_mode(text);
  } catch (const SchemaError&) {
    throw ValidationError(location(row, "mode") + ": unknown mode '" + text + "'");
  }
}

int parse_vocab(const std::string& text, const std::vector<std::string>& vocab,
                std::size_t row, const std::string& column) {
  const auto it = std::find(vocab.begin(), vocab.end(), text);
  if (it == vocab.end())
    throw ValidationError(location(row, column) + ": out-of-vocabulary value '" + text + "'");
  return static_cast<int>(it - vocab.begin());
}

}  // namespace

std::vector<ShipmentRecord> ingest_table(std::istream& source, const SchemaRegistry& schema) {
  schema.validate();
  std::string line;
  if (!std::getline(source, line)) throw SchemaError("empty input: no header row");
  const std::vector<std::string> header = split_csv_line(line);

  const auto& expected = csv_columns();
  std::vector<std::size_t> col_of(expected.size());
  for (std::size_t c = 0; c < expected.size(); ++c) {
    const auto it = std::find(header.begin(), header.end(), expected[c]);
    if (it == header.end())
      throw SchemaError("missing column '" + expected[c] + "' in header");
    col_of[c] = static_cast<std::size_t>(it - header.begin());
  }
  for (const auto& name : header)
    if (std::find(expected.begin(), expected.end(), name) == expected.end())
      throw SchemaError("unknown column '" + name + "' in header");

  std::vector<ShipmentRecord> records;
  std::size_t row = 1;  // header is row 0
  while (std::getline(source, line)) {
    if (line.empty() || line == "\r") {
      ++row;
      continue;
    }
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ValidationError("row " + std::to_string(row) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    auto field = [&](std::size_t c) -> const std::string& { return fields[col_of[c]]; };

    ShipmentRecord r;
    r.mode = parse_mode(field(0), schema, row);
    r.size_lb = parse_nonnegative(field(1), row, "size_lb");
    r.value_usd = parse_nonnegative(field(2), row, "value_usd");
    r.distance_mi = parse_nonnegative(field(3), row, "distance_mi");
    r.commodity = parse_vocab(field(4), schema.commodities(), row, "commodity");
    r.hazmat = parse_vocab(field(5), schema.hazmat_levels(), row, "hazmat");
    r.temp_controlled = parse_flag(field(6), row, "temp_controlled");
    r.export_shipment = parse_flag(field(7), row, "export");
    r.origin_cfs = parse_vocab(field(8), schema.cfs_areas(), row, "origin_cfs");
    r.dest_cfs = parse_vocab(field(9), schema.cfs_areas(), row, "dest_cfs");
    r.naics = parse_vocab(field(10), schema.naics_classes(), row, "naics");
    r.origin_employee_density = parse_nonnegative(field(11), row, "origin_employee_density");
    r.origin_warehouse_count = parse_nonnegative(field(12), row, "origin_warehouse_count");
    r.origin_highway_density = parse_nonnegative(field(13), row, "origin_highway_density");
    r.origin_railway_density = parse_nonnegative(field(14), row, "origin_railway_density");
    r.origin_temp_over_60f = parse_flag(field(15), row, "origin_temp_over_60f");
    r.dest_population_density = parse_nonnegative(field(16), row, "dest_population_density");
    r.dest_income_under_50k = parse_flag(field(17), row, "dest_income_under_50k");
    r.dest_temp_over_60f = parse_flag(field(18), row, "dest_temp_over_60f");
    r.dest_highway_density = parse_nonnegative(field(19), row, "dest_highway_density");
    r.dest_railway_density = parse_nonnegative(field(20), row, "dest_railway_density");
    r.weight = parse_number(field(21), row, "weight");
    if (!(r.weight > 0.0))
      throw ValidationError(location(row, "weight") + ": weight must be positive");
    records.push_back(r);
    ++row;
  }
  return records;
}

std::vector<ShipmentRecord> ingest_table_file(const std::string& path,
                                              const SchemaRegistry& schema) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open data file: " + path);
  return ingest_table(in, schema);
}

void write_table(std::ostream& out, const std::vector<ShipmentRecord>& records,
                 const SchemaRegistry& schema) {
  const auto& cols = csv_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << "\n";
  const auto flag = [](bool b) { return b ? "yes" : "no"; };
  for (const ShipmentRecord& r : records) {
    out << mode_class_names()[static_cast<std::size_t>(r.mode)] << ','
        << format_double(r.size_lb) << ',' << format_double(r.value_usd) << ','
        << format_double(r.distance_mi) << ','
        << schema.commodities()[static_cast<std::size_t>(r.commodity)] << ','
        << schema.hazmat_levels()[static_cast<std::size_t>(r.hazmat)] << ','
        << flag(r.temp_controlled) << ',' << flag(r.export_shipment) << ','
        << schema.cfs_areas()[static_cast<std::size_t>(r.origin_cfs)] << ','
        << schema.cfs_areas()[static_cast<std::size_t>(r.dest_cfs)] << ','
        << schema.naics_classes()[static_cast<std::size_t>(r.naics)] << ','
        << format_double(r.origin_employee_density) << ','
        << format_double(r.origin_warehouse_count) << ','
        << format_double(r.origin_highway_density) << ','
        << format_double(r.origin_railway_density) << ','
        << flag(r.origin_temp_over_60f) << ','
        << format_double(r.dest_population_density) << ','
        << flag(r.dest_income_under_50k) << ',' << flag(r.dest_temp_over_60f) << ','
        << format_double(r.dest_highway_density) << ','
        << format_double(r.dest_railway_density) << ',' << format_double(r.weight) << "\n";
  }
}

void write_table_file(const std::string& path, const std::vector<ShipmentRecord>& records,
                      const SchemaRegistry& schema) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write data file: " + path);
  write_table(out, records, schema);
}

}  // namespace freightbench
