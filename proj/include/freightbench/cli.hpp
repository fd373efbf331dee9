#pragma once

#include <string>
#include <vector>

#include "freightbench/run_config.hpp"

namespace freightbench {

// Command bodies behind the executable; each returns a process exit status
// and writes its artifacts under config.output_dir.
int cmd_generate(const RunConfig& config);
int cmd_run(const RunConfig& config);
int cmd_fit(const RunConfig& config, const std::string& family_name_str);
int cmd_importance(const RunConfig& config, const std::vector<std::string>& model_paths);
int cmd_report(const RunConfig& config);

// Loads the configured data source (CSV path or synthetic draw) and encodes
// it with the configured registry and the default binning scheme.
EncodedDataset load_source_dataset(const RunConfig& config);

}  // namespace freightbench
