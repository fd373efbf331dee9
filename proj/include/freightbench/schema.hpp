#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "freightbench/dataset.hpp"

namespace freightbench {

// Closed vocabularies for every categorical column, in code order, plus the
// raw-mode consolidation map. The default mapping of the 21 raw CFS modes onto
// the five groups is a best reading of the survey prose and is configurable:
// edit the registry file and point runs at it.
class SchemaRegistry {
 public:
  static SchemaRegistry defaults();
  static SchemaRegistry load(const std::string& path);
  static SchemaRegistry from_json_text(const std::string& text);

  void save(const std::string& path) const;
  std::string to_json_text() const;

  const std::vector<std::string>& raw_modes() const { return raw_modes_; }
  const std::vector<std::string>& commodities() const { return commodities_; }
  const std::vector<std::string>& hazmat_levels() const { return hazmat_levels_; }
  const std::vector<std::string>& cfs_areas() const { return cfs_areas_; }
  const std::vector<std::string>& naics_classes() const { return naics_classes_; }

  // Five-way consolidation. Unregistered codes/names raise SchemaError.
  ModeClass consolidate_mode(const std::string& raw_mode) const;
  ModeClass consolidate_mode(int raw_mode_code) const;

  int commodity_code(const std::string& name) const;
  int hazmat_code(const std::string& name) const;
  int cfs_area_code(const std::string& name) const;
  int naics_code(const std::string& name) const;

  void validate() const;

 private:
  std::vector<std::string> raw_modes_;
  std::map<std::string, std::string> consolidation_;  // raw mode -> group name
  std::vector<std::string> commodities_;
  std::vector<std::string> hazmat_levels_;
  std::vector<std::string> cfs_areas_;
  std::vector<std::string> naics_classes_;
};

// Column order of the delimited interchange format: the 21 Table-style
// variables plus "weight". Mode may be a five-way group name or a raw mode
// name (raw names are consolidated on ingestion).
const std::vector<std::string>& csv_columns();

std::vector<ShipmentRecord> ingest_table(std::istream& source, const SchemaRegistry& schema);
std::vector<ShipmentRecord> ingest_table_file(const std::string& path, const SchemaRegistry& schema);

void write_table(std::ostream& out, const std::vector<ShipmentRecord>& records,
                 const SchemaRegistry& schema);
void write_table_file(const std::string& path, const std::vector<ShipmentRecord>& records,
                      const SchemaRegistry& schema);

}  // namespace freightbench
