#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "freightbench/cli.hpp"
#include "freightbench/ensemble.hpp"
#include "freightbench/errors.hpp"
#include "freightbench/evaluation.hpp"
#include "freightbench/run_config.hpp"
#include "freightbench/schema.hpp"
#include "freightbench/synthetic.hpp"

namespace py = pybind11;
using namespace freightbench;

namespace {

LearnerSpec make_spec(const std::string& family, std::uint64_t seed,
                      const std::string& hyperparams_json) {
  const Family f = family_from_name(family);
  LearnerSpec spec = LearnerSpec::defaults(f, seed);
  if (!hyperparams_json.empty())
    spec.params = hyperparams_from_json_text(f, hyperparams_json);
  spec.validate();
  return spec;
}

SyntheticSpec make_synth_spec(std::size_t n, const std::vector<double>& shares,
                              std::uint64_t seed, double noise) {
  SyntheticSpec spec;
  spec.n_records = n;
  if (!shares.empty()) {
    if (shares.size() != kNumModes)
      throw ValidationError("target_mode_shares needs exactly 5 entries");
    for (int m = 0; m < kNumModes; ++m)
      spec.target_mode_shares[static_cast<std::size_t>(m)] = shares[static_cast<std::size_t>(m)];
  }
  spec.seed = seed;
  spec.noise_level = noise;
  return spec;
}

py::dict metrics_to_dict(const MetricsReport& m) {
  py::dict d;
  d["accuracy"] = m.accuracy;
  py::list precision, recall, f1, support;
  for (int c = 0; c < kNumModes; ++c) {
    const std::size_t ci = static_cast<std::size_t>(c);
    precision.append(m.precision[ci]);
    recall.append(m.recall_defined[ci] ? py::object(py::float_(m.recall[ci])) : py::none());
    f1.append(m.f1_defined[ci] ? py::object(py::float_(m.f1[ci])) : py::none());
    support.append(m.support[ci]);
  }
  d["precision"] = precision;
  d["recall"] = recall;
  d["f1"] = f1;
  d["support"] = support;
  Eigen::MatrixXd confusion = m.confusion.counts;
  d["confusion"] = confusion;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "freight mode choice classifier benchmark (C++ core)";

  py::register_exception<SchemaError>(m, "SchemaError");
  py::register_exception<ValidationError>(m, "ValidationError");
  py::register_exception<DataError>(m, "DataError");
  py::register_exception<NumericalError>(m, "NumericalError");
  py::register_exception<ShapeError>(m, "ShapeError");
  py::register_exception<ModelTypeError>(m, "ModelTypeError");

  py::class_<EncodedDataset>(m, "Dataset")
      .def_readonly("features", &EncodedDataset::features)
      .def_readonly("labels", &EncodedDataset::labels)
      .def_readonly("weights", &EncodedDataset::weights)
      .def_readonly("feature_names", &EncodedDataset::feature_names)
      .def_readonly("class_names", &EncodedDataset::class_names)
      .def("__len__", [](const EncodedDataset& d) { return d.size(); })
      .def("subset", [](const EncodedDataset& d, const std::vector<std::size_t>& rows) {
        return d.subset(rows);
      });

  py::class_<Model, std::shared_ptr<Model>>(m, "Model")
      .def_property_readonly("family",
                             [](const Model& mdl) { return family_name(mdl.family()); })
      .def_property_readonly("feature_count", &Model::feature_count)
      .def_property_readonly("train_samples", &Model::train_samples)
      .def("predict", &Model::predict, py::arg("x"))
      .def("predict_proba", &Model::predict_proba, py::arg("x"))
      .def("save", [](const Model& mdl, const std::string& path) { save_model(mdl, path); },
           py::arg("path"))
      .def("to_json", [](const Model& mdl) { return model_to_json(mdl); });

  m.def("generate_dataset",
        [](std::size_t n, const std::vector<double>& shares, std::uint64_t seed, double noise) {
          return encode_dataset(generate_synthetic(make_synth_spec(n, shares, seed, noise)),
                                BinningScheme{});
        },
        py::arg("n"), py::arg("target_mode_shares") = std::vector<double>{},
        py::arg("seed") = 0, py::arg("noise_level") = 0.3,
        "Draw a synthetic shipment dataset, already encoded.");

  m.def("generate_csv",
        [](const std::string& path, std::size_t n, const std::vector<double>& shares,
           std::uint64_t seed, double noise) {
          write_table_file(path, generate_synthetic(make_synth_spec(n, shares, seed, noise)),
                           SchemaRegistry::defaults());
        },
        py::arg("path"), py::arg("n"), py::arg("target_mode_shares") = std::vector<double>{},
        py::arg("seed") = 0, py::arg("noise_level") = 0.3,
        "Write a synthetic shipment table in the interchange CSV format.");

  m.def("ingest_csv",
        [](const std::string& path, const std::string& registry_path) {
          const SchemaRegistry registry = registry_path.empty()
                                              ? SchemaRegistry::defaults()
                                              : SchemaRegistry::load(registry_path);
          return encode_dataset(ingest_table_file(path, registry), BinningScheme{});
        },
        py::arg("path"), py::arg("registry_path") = "",
        "Read and encode a shipment table.");

  m.def("fit",
        [](const std::string& family, const EncodedDataset& data, std::uint64_t seed,
           const std::string& hyperparams_json) {
          return fit(make_spec(family, seed, hyperparams_json), data);
        },
        py::arg("family"), py::arg("data"), py::arg("seed") = 0,
        py::arg("hyperparams_json") = "",
        "Fit one of the nine classifier families.");

  m.def("load_model", &load_model, py::arg("path"));

  m.def("compute_metrics",
        [](const std::vector<int>& y_true, const std::vector<int>& y_pred,
           const Eigen::VectorXd& weights) {
          return metrics_to_dict(compute_metrics(y_true, y_pred, weights));
        },
        py::arg("y_true"), py::arg("y_pred"), py::arg("weights"),
        "Weighted accuracy, per-mode precision/recall/F1 and the confusion matrix.");

  m.def("holdout_split",
        [](const EncodedDataset& data, double ratio, std::uint64_t seed) {
          HoldoutSplit split = holdout_split(data, ratio, seed);
          return py::make_tuple(std::move(split.train), std::move(split.test));
        },
        py::arg("data"), py::arg("test_ratio"), py::arg("seed") = 0);

  m.def("cross_validate",
        [](const std::string& family, const EncodedDataset& train, int k, std::uint64_t seed,
           const std::string& hyperparams_json) {
          const CrossValidation cv =
              cross_validate(make_spec(family, seed, hyperparams_json), train, k, seed);
          py::dict d;
          d["fold_accuracy"] = cv.fold_accuracy;
          d["mean"] = cv.mean;
          d["stddev"] = cv.stddev;
          return d;
        },
        py::arg("family"), py::arg("train"), py::arg("k"), py::arg("seed") = 0,
        py::arg("hyperparams_json") = "");

  m.def("impurity_importance",
        [](const Model& model) { return Eigen::VectorXd(impurity_importance(model)); },
        py::arg("model"),
        "Normalized per-feature impurity decrease for tree-family models.");

  m.def("weighted_mode_shares",
        [](const EncodedDataset& data) {
          const auto shares = weighted_mode_shares(data);
          return std::vector<double>(shares.begin(), shares.end());
        },
        py::arg("data"));

  m.def("feature_names", [] { return default_feature_names(); });
  m.def("class_names", [] {
    const auto& names = mode_class_names();
    return std::vector<std::string>(names.begin(), names.end());
  });
  m.def("family_names", [] {
    std::vector<std::string> names;
    for (Family f : kAllFamilies) names.push_back(family_name(f));
    return names;
  });

  m.attr("__version__") = "1.0.0";
}
