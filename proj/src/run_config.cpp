#include "freightbench/run_config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "freightbench/errors.hpp"

namespace freightbench {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& keypath, const std::string& what) {
  throw ValidationError("config: " + keypath + ": " + what);
}

void require_keys(const json& j, const std::set<std::string>& allowed,
                  const std::string& keypath) {
  for (const auto& [key, value] : j.items())
    if (allowed.find(key) == allowed.end()) fail(keypath + "." + key, "unknown key");
}

template <typename T>
T get_or(const json& j, const char* key, const T& fallback, const std::string& keypath) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(keypath + "." + key, "wrong type");
  }
}

json hyper_to_json(Family family, const HyperParams& params) {
  json j;
  switch (family) {
    case Family::kMnl: {
      const auto& c = std::get<MnlConfig>(params);
      j = {{"max_iter", c.max_iter}, {"tol", c.tol}};
      break;
    }
    case Family::kNb: {
      const auto& c = std::get<NbConfig>(params);
      j = {{"var_smoothing", c.var_smoothing}};
      break;
    }
    case Family::kSvm: {
      const auto& c = std::get<SvmConfig>(params);
      j = {{"c", c.c}, {"max_iter", c.max_iter}, {"learning_rate", c.learning_rate}};
      break;
    }
    case Family::kAnn: {
      const auto& c = std::get<MlpConfig>(params);
      j = {{"hidden_units", c.hidden_units},
           {"epochs", c.epochs},
           {"learning_rate", c.learning_rate},
           {"batch_size", c.batch_size}};
      break;
    }
    case Family::kKnn: {
      const auto& c = std::get<KnnConfig>(params);
      j = {{"k", c.k}};
      break;
    }
    case Family::kCart: {
      const auto& c = std::get<CartConfig>(params);
      j = {{"max_depth", c.max_depth}, {"min_samples_split", c.min_samples_split}};
      break;
    }
    case Family::kRf: {
      const auto& c = std::get<ForestConfig>(params);
      j = {{"n_trees", c.n_trees},
           {"mtry", c.mtry},
           {"bootstrap", c.bootstrap},
           {"max_depth", c.tree.max_depth},
           {"min_samples_split", c.tree.min_samples_split}};
      break;
    }
    case Family::kBag: {
      const auto& c = std::get<BaggingConfig>(params);
      j = {{"n_estimators", c.n_estimators},
           {"bootstrap", c.bootstrap},
           {"max_depth", c.tree.max_depth},
           {"min_samples_split", c.tree.min_samples_split}};
      break;
    }
    case Family::kBoost: {
      const auto& c = std::get<BoostConfig>(params);
      j = {{"n_stages", c.n_stages},
           {"learning_rate", c.learning_rate},
           {"max_depth", c.max_depth},
           {"min_samples_split", c.min_samples_split}};
      break;
    }
  }
  return j;
}

HyperParams hyper_from_json(Family family, const json& j, const std::string& keypath) {
  switch (family) {
    case Family::kMnl: {
      require_keys(j, {"max_iter", "tol"}, keypath);
      MnlConfig c;
      c.max_iter = get_or(j, "max_iter", c.max_iter, keypath);
      c.tol = get_or(j, "tol", c.tol, keypath);
      return c;
    }
    case Family::kNb: {
      require_keys(j, {"var_smoothing"}, keypath);
      NbConfig c;
      c.var_smoothing = get_or(j, "var_smoothing", c.var_smoothing, keypath);
      return c;
    }
    case Family::kSvm: {
      require_keys(j, {"c", "max_iter", "learning_rate"}, keypath);
      SvmConfig c;
      c.c = get_or(j, "c", c.c, keypath);
      c.max_iter = get_or(j, "max_iter", c.max_iter, keypath);
      c.learning_rate = get_or(j, "learning_rate", c.learning_rate, keypath);
      return c;
    }
    case Family::kAnn: {
      require_keys(j, {"hidden_units", "epochs", "learning_rate", "batch_size"}, keypath);
      MlpConfig c;
      c.hidden_units = get_or(j, "hidden_units", c.hidden_units, keypath);
      c.epochs = get_or(j, "epochs", c.epochs, keypath);
      c.learning_rate = get_or(j, "learning_rate", c.learning_rate, keypath);
      c.batch_size = get_or(j, "batch_size", c.batch_size, keypath);
      return c;
    }
    case Family::kKnn: {
      require_keys(j, {"k"}, keypath);
      KnnConfig c;
      c.k = get_or(j, "k", c.k, keypath);
      return c;
    }
    case Family::kCart: {
      require_keys(j, {"max_depth", "min_samples_split"}, keypath);
      CartConfig c;
      c.max_depth = get_or(j, "max_depth", c.max_depth, keypath);
      c.min_samples_split = get_or(j, "min_samples_split", c.min_samples_split, keypath);
      return c;
    }
    case Family::kRf: {
      require_keys(j, {"n_trees", "mtry", "bootstrap", "max_depth", "min_samples_split"},
                   keypath);
      ForestConfig c;
      c.n_trees = get_or(j, "n_trees", c.n_trees, keypath);
      c.mtry = get_or(j, "mtry", c.mtry, keypath);
      c.bootstrap = get_or(j, "bootstrap", c.bootstrap, keypath);
      c.tree.max_depth = get_or(j, "max_depth", c.tree.max_depth, keypath);
      c.tree.min_samples_split = get_or(j, "min_samples_split", c.tree.min_samples_split, keypath);
      return c;
    }
    case Family::kBag: {
      require_keys(j, {"n_estimators", "bootstrap", "max_depth", "min_samples_split"}, keypath);
      BaggingConfig c;
      c.n_estimators = get_or(j, "n_estimators", c.n_estimators, keypath);
      c.bootstrap = get_or(j, "bootstrap", c.bootstrap, keypath);
      c.tree.max_depth = get_or(j, "max_depth", c.tree.max_depth, keypath);
      c.tree.min_samples_split = get_or(j, "min_samples_split", c.tree.min_samples_split, keypath);
      return c;
    }
    case Family::kBoost: {
      require_keys(j, {"n_stages", "learning_rate", "max_depth", "min_samples_split"}, keypath);
      BoostConfig c;
      c.n_stages = get_or(j, "n_stages", c.n_stages, keypath);
      c.learning_rate = get_or(j, "learning_rate", c.learning_rate, keypath);
      c.max_depth = get_or(j, "max_depth", c.max_depth, keypath);
      c.min_samples_split = get_or(j, "min_samples_split", c.min_samples_split, keypath);
      return c;
    }
  }
  fail(keypath, "unknown family");
}

}  // namespace

RunConfig default_run_config() {
  RunConfig config;
  config.synthetic.n_records = 20000;
  config.synthetic.seed = 2012;
  config.synthetic.noise_level = 0.3;
  config.grid.families.assign(kAllFamilies.begin(), kAllFamilies.end());
  config.grid.ratios = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  config.grid.fold_counts = {10, 20, 30};
  config.grid.sample_sizes = {136073, 226785, 453574, 907139, 1360706, 1814271, 2267842};
  for (Family f : kAllFamilies)
    config.grid.hyperparameters[f] = LearnerSpec::defaults(f).params;
  config.grid.master_seed = 2012;
  config.grid.workers = 1;
  config.grid.weights_in_fit = true;
  config.output_dir = "out";
  return config;
}

void RunConfig::validate() const {
  if (grid.families.empty()) fail("grid.families", "must not be empty");
  for (double r : grid.ratios)
    if (!(r > 0.0 && r < 1.0)) fail("grid.ratios", "ratio " + std::to_string(r) +
                                    " outside (0, 1)");
  for (int k : grid.fold_counts)
    if (k < 2) fail("grid.fold_counts", "fold count " + std::to_string(k) + " below 2");
  for (std::size_t s : grid.sample_sizes)
    if (s == 0) fail("grid.sample_sizes", "sample size must be positive");
  if (grid.workers < 1) fail("workers", "must be >= 1");
  if (use_synthetic()) synthetic.validate();
  for (const auto& [family, params] : grid.hyperparameters) {
    LearnerSpec spec;
    spec.family = family;
    spec.params = params;
    spec.validate();
  }
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig config = default_run_config();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    config.validate();
    return config;
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: parse failure: ") + e.what());
  }
  require_keys(j,
               {"data", "registry", "grid", "hyperparameters", "master_seed", "workers",
                "weights_in_fit", "output_dir"},
               "config");

  if (j.contains("data")) {
    const json& d = j.at("data");
    require_keys(d, {"path", "synthetic"}, "config.data");
    config.data_path = get_or<std::string>(d, "path", "", "config.data");
    if (d.contains("synthetic")) {
      const json& s = d.at("synthetic");
      require_keys(s, {"n_records", "target_mode_shares", "seed", "noise_level"},
                   "config.data.synthetic");
      config.synthetic.n_records =
          get_or<std::size_t>(s, "n_records", config.synthetic.n_records, "config.data.synthetic");
      if (s.contains("target_mode_shares")) {
        const auto shares = s.at("target_mode_shares").get<std::vector<double>>();
        if (shares.size() != kNumModes)
          fail("config.data.synthetic.target_mode_shares", "need exactly 5 entries");
        for (int m = 0; m < kNumModes; ++m)
          config.synthetic.target_mode_shares[static_cast<std::size_t>(m)] =
              shares[static_cast<std::size_t>(m)];
      }
      config.synthetic.seed =
          get_or<std::uint64_t>(s, "seed", config.synthetic.seed, "config.data.synthetic");
      config.synthetic.noise_level = get_or<double>(s, "noise_level", config.synthetic.noise_level,
                                                    "config.data.synthetic");
    }
  }
  config.registry_path = get_or<std::string>(j, "registry", "", "config");

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    require_keys(g, {"families", "ratios", "fold_counts", "sample_sizes"}, "config.grid");
    if (g.contains("families")) {
      config.grid.families.clear();
      for (const auto& name : g.at("families").get<std::vector<std::string>>()) {
        try {
          config.grid.families.push_back(family_from_name(name));
        } catch (const ValidationError&) {
          fail("config.grid.families", "unknown family '" + name + "'");
        }
      }
    }
    if (g.contains("ratios")) config.grid.ratios = g.at("ratios").get<std::vector<double>>();
    if (g.contains("fold_counts"))
      config.grid.fold_counts = g.at("fold_counts").get<std::vector<int>>();
    if (g.contains("sample_sizes"))
      config.grid.sample_sizes = g.at("sample_sizes").get<std::vector<std::size_t>>();
  }

  if (j.contains("hyperparameters")) {
    for (const auto& [name, hj] : j.at("hyperparameters").items()) {
      Family family;
      try {
        family = family_from_name(name);
      } catch (const ValidationError&) {
        fail("config.hyperparameters." + name, "unknown family");
      }
      config.grid.hyperparameters[family] =
          hyper_from_json(family, hj, "config.hyperparameters." + name);
    }
  }

  config.grid.master_seed =
      get_or<std::uint64_t>(j, "master_seed", config.grid.master_seed, "config");
  config.grid.workers = get_or<int>(j, "workers", config.grid.workers, "config");
  config.grid.weights_in_fit =
      get_or<bool>(j, "weights_in_fit", config.grid.weights_in_fit, "config");
  config.output_dir = get_or<std::string>(j, "output_dir", config.output_dir, "config");

  config.validate();
  return config;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_to_json_text(const RunConfig& config) {
  json j;
  j["data"]["path"] = config.data_path;
  j["data"]["synthetic"] = {
      {"n_records", config.synthetic.n_records},
      {"target_mode_shares", config.synthetic.target_mode_shares},
      {"seed", config.synthetic.seed},
      {"noise_level", config.synthetic.noise_level},
  };
  j["registry"] = config.registry_path;
  std::vector<std::string> family_names;
  for (Family f : config.grid.families) family_names.push_back(family_name(f));
  j["grid"] = {{"families", family_names},
               {"ratios", config.grid.ratios},
               {"fold_counts", config.grid.fold_counts},
               {"sample_sizes", config.grid.sample_sizes}};
  json hp;
  for (const auto& [family, params] : config.grid.hyperparameters)
    hp[family_name(family)] = hyper_to_json(family, params);
  j["hyperparameters"] = std::move(hp);
  j["master_seed"] = config.grid.master_seed;
  j["workers"] = config.grid.workers;
  j["weights_in_fit"] = config.grid.weights_in_fit;
  j["output_dir"] = config.output_dir;
  return j.dump(2) + "\n";
}

HyperParams hyperparams_from_json_text(Family family, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("hyperparameters: parse failure: ") + e.what());
  }
  return hyper_from_json(family, j, family_name(family));
}

std::string hyperparams_to_json_text(Family family, const HyperParams& params) {
  return hyper_to_json(family, params).dump();
}

std::uint64_t fnv1a_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace freightbench
