"""Dialectal Arabic sentiment pipeline (C++ core)."""

from ._arsent import (
    ArsentError,
    DataError,
    DocTermMatrix,
    Preprocessor,
    SvmModel,
    ValidationError,
    Vocabulary,
    __version__,
    build_vocab,
    cross_validate,
    light_stem,
    metrics,
    normalize,
    percent,
    preprocess,
    project,
    run_experiment,
    score,
    select,
    strip_noise,
    stratified_kfold,
    tokenize,
    train_svm,
    vectorize,
)

__all__ = [
    "ArsentError",
    "DataError",
    "DocTermMatrix",
    "Preprocessor",
    "SvmModel",
    "ValidationError",
    "Vocabulary",
    "__version__",
    "build_vocab",
    "cross_validate",
    "light_stem",
    "metrics",
    "normalize",
    "percent",
    "preprocess",
    "project",
    "run_experiment",
    "score",
    "select",
    "strip_noise",
    "stratified_kfold",
    "tokenize",
    "train_svm",
    "vectorize",
]
