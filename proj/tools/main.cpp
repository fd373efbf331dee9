#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "freightbench/cli.hpp"
#include "freightbench/errors.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "run configuration file (JSON)")
      ->envname("FREIGHTBENCH_CONFIG");
  cmd->add_option("--seed", opts.seed, "master seed override")->envname("FREIGHTBENCH_SEED");
  cmd->add_option("--workers", opts.workers, "parallel grid workers")
      ->envname("FREIGHTBENCH_WORKERS");
  cmd->add_option("--out", opts.out_dir, "output directory")->envname("FREIGHTBENCH_OUT");
}

freightbench::RunConfig resolve_config(const CommonOpts& opts) {
  freightbench::RunConfig config = opts.config_path.empty()
                                       ? freightbench::default_run_config()
                                       : freightbench::parse_config(opts.config_path);
  if (opts.seed) {
    config.grid.master_seed = *opts.seed;
    config.synthetic.seed = *opts.seed;
  }
  if (opts.workers) config.grid.workers = *opts.workers;
  if (opts.out_dir) config.output_dir = *opts.out_dir;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"freight mode choice classifier benchmark"};
  app.require_subcommand(1);

  CommonOpts generate_opts, run_opts, fit_opts, importance_opts, report_opts;
  std::optional<std::size_t> generate_n;
  std::string fit_family;
  std::vector<std::string> model_paths;

  CLI::App* generate = app.add_subcommand("generate", "write a synthetic shipment table");
  add_common(generate, generate_opts);
  generate->add_option("--n", generate_n, "number of records");

  CLI::App* run = app.add_subcommand("run", "run the evaluation grid");
  add_common(run, run_opts);

  CLI::App* fit = app.add_subcommand("fit", "fit a single classifier on the data source");
  add_common(fit, fit_opts);
  fit->add_option("--family", fit_family, "classifier family (mnl, nb, svm, ann, knn, cart, rf, boost, bag)")
      ->required();

  CLI::App* importance = app.add_subcommand("importance", "variable importance tables");
  add_common(importance, importance_opts);
  importance->add_option("--model", model_paths, "serialized tree-family model path(s)")
      ->required();

  CLI::App* report = app.add_subcommand("report", "plot-ready tables from a finished run");
  add_common(report, report_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      freightbench::RunConfig config = resolve_config(generate_opts);
      if (generate_n) config.synthetic.n_records = *generate_n;
      config.validate();
      return freightbench::cmd_generate(config);
    }
    if (run->parsed()) return freightbench::cmd_run(resolve_config(run_opts));
    if (fit->parsed()) return freightbench::cmd_fit(resolve_config(fit_opts), fit_family);
    if (importance->parsed())
      return freightbench::cmd_importance(resolve_config(importance_opts), model_paths);
    if (report->parsed()) return freightbench::cmd_report(resolve_config(report_opts));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
