"""Surrogate regression models for shared-buffer sweep results."""

from .dataset import (
    FEATURES,
    TARGETS,
    TARGETS_NO_DROPS,
    DatasetRow,
    build_dataset,
    split,
    write_dataset_csv,
)
from .models import (
    EvalReport,
    FittedModel,
    ModelSpec,
    evaluate,
    evaluate_over_seeds,
    fit_and_evaluate,
    load_model,
    predict,
    save_model,
    train,
)

__version__ = "0.1.0"
