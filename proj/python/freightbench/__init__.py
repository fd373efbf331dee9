"""Freight mode choice classifier benchmark.

Nine from-scratch classifiers (MNL, NB, SVM, ANN, KNN, CART, RF, BOOST, BAG)
over CFS-schema shipment tables, with weighted metrics, holdout + k-fold
evaluation and impurity-based variable importance. The heavy lifting lives in
the C++ extension module.
"""

from freightbench._core import (
    Dataset,
    Model,
    DataError,
    ModelTypeError,
    NumericalError,
    SchemaError,
    ShapeError,
    ValidationError,
    class_names,
    compute_metrics,
    cross_validate,
    family_names,
    feature_names,
    fit,
    generate_csv,
    generate_dataset,
    holdout_split,
    impurity_importance,
    ingest_csv,
    load_model,
    weighted_mode_shares,
    __version__,
)

__all__ = [
    "Dataset",
    "Model",
    "DataError",
    "ModelTypeError",
    "NumericalError",
    "SchemaError",
    "ShapeError",
    "ValidationError",
    "class_names",
    "compute_metrics",
    "cross_validate",
    "family_names",
    "feature_names",
    "fit",
    "generate_csv",
    "generate_dataset",
    "holdout_split",
    "impurity_importance",
    "ingest_csv",
    "load_model",
    "weighted_mode_shares",
    "__version__",
]
