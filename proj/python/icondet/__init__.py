"""Icon-aware PE malware detection pipeline.

Thin wrapper over the native core: PE/ICO parsing, the 1114-dimensional icon
feature stack (summary statistics, oriented gradients, autoencoder latents),
two-stage clustering with KNN assignment, and the regularized linear
classifier harness.
"""

from ._core import (
    AE_DIM,
    HOG_DIM,
    ICON_FEATURE_DIM,
    MC_DIM,
    AeModel,
    ClusterModel,
    Icon,
    LinearModel,
    PeSummary,
    Section,
    ae_gradient_check,
    composite,
    decode_icon,
    decode_ico,
    default_alpha_grid,
    encode_png,
    evaluate,
    extract_icons,
    fit_model,
    hdbscan,
    hog_features,
    icon_features,
    kmeans,
    mc_features,
    one_hot,
    parse_pe,
    predict_scores,
    roc_auc,
    section_entropy,
    select_primary_icon,
    silhouette,
    stratified_kfold,
    stratified_split,
    train_ae,
    tune_alpha,
)

__all__ = [
    "AE_DIM",
    "HOG_DIM",
    "ICON_FEATURE_DIM",
    "MC_DIM",
    "AeModel",
    "ClusterModel",
    "Icon",
    "LinearModel",
    "PeSummary",
    "Section",
    "ae_gradient_check",
    "composite",
    "decode_icon",
    "decode_ico",
    "default_alpha_grid",
    "encode_png",
    "evaluate",
    "extract_icons",
    "fit_model",
    "hdbscan",
    "hog_features",
    "icon_features",
    "kmeans",
    "mc_features",
    "one_hot",
    "parse_pe",
    "predict_scores",
    "roc_auc",
    "section_entropy",
    "select_primary_icon",
    "silhouette",
    "stratified_kfold",
    "stratified_split",
    "train_ae",
    "tune_alpha",
]

__version__ = "0.1.0"
