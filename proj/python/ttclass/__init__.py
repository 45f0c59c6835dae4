"""Tensor-train image classification.

Two classifiers over the same tensor-product feature map: a closed-form
kernel regression (Gram matrix assembled as an entrywise product of
per-coordinate factors) and an alternating ridge regression that fits a
low-rank tensor-train coefficient per label.
"""

from ._ttclass import (
    ArrConfig,
    Dataset,
    FeatureBasis,
    IoError,
    KernelModel,
    NumericalError,
    TensorTrain,
    TruncatedSvd,
    TtModel,
    ValidationError,
    apply_basis,
    arr_fit,
    build_feature_matrices,
    build_gram,
    direct_sum_labels,
    export_csv,
    load_idx,
    local_gram,
    make_synthetic_digits,
    mandy_fit,
    materialize_psi_hat,
    reduce_pool2,
    save_idx,
    solve_gram,
    subsample,
    truncated_svd,
    tsvd_least_squares,
)

__all__ = [
    "ArrConfig",
    "Dataset",
    "FeatureBasis",
    "IoError",
    "KernelModel",
    "NumericalError",
    "TensorTrain",
    "TruncatedSvd",
    "TtModel",
    "ValidationError",
    "apply_basis",
    "arr_fit",
    "build_feature_matrices",
    "build_gram",
    "direct_sum_labels",
    "export_csv",
    "load_idx",
    "local_gram",
    "make_synthetic_digits",
    "mandy_fit",
    "materialize_psi_hat",
    "reduce_pool2",
    "save_idx",
    "solve_gram",
    "subsample",
    "truncated_svd",
    "tsvd_least_squares",
]
