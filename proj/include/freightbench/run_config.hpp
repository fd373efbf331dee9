#pragma once

#include <string>

#include "freightbench/evaluation.hpp"
#include "freightbench/synthetic.hpp"

namespace freightbench {

// Full description of a benchmarking run. Defaults reproduce the study's
// experiment design: all nine families, split ratios 0.1..0.6, 10/20/30-fold
// cross validation and the seven published sample sizes, with the published
// hyperparameters (RF 10 trees / mtry 2, KNN k=5, BOOST 100 stages, BAG 10
// trees, MLP 100 hidden units).
struct RunConfig {
  std::string data_path;    // empty: draw from the synthetic generator
  SyntheticSpec synthetic;  // used when data_path is empty
  std::string registry_path;  // empty: built-in default registry
  GridConfig grid;
  std::string output_dir = "out";

  bool use_synthetic() const { return data_path.empty(); }
  void validate() const;
};

RunConfig default_run_config();

// Strict parse: unknown keys and invalid values fail with the offending key
// path. Missing keys fall back to the defaults above.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

std::string config_to_json_text(const RunConfig& config);

// Family hyperparameters from a JSON object (the per-family block of the
// config's "hyperparameters" section); missing fields keep their defaults.
HyperParams hyperparams_from_json_text(Family family, const std::string& json_text);
std::string hyperparams_to_json_text(Family family, const HyperParams& params);

// Stable 64-bit FNV-1a content hash used by the run manifest.
std::uint64_t fnv1a_hash(const std::string& bytes);

}  // namespace freightbench
