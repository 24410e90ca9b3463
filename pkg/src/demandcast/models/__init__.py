"""Forecast models behind one fit/predict contract."""

from .additive import AdditiveConfig, AdditiveModel, additive_fit
from .base import FittedModel, ForecastModel
from .benchmarks import (
    ENHANCED_DEFAULT_WEIGHTS,
    ArimaModel,
    EnhancedNaiveModel,
    InHouseModel,
    SeasonalNaiveModel,
    arima_fit,
    enhanced_naive,
    in_house,
    seasonal_naive,
)
from .linear import KnnModel, RidgeModel, knn_fit, knn_predict, ridge_fit
from .trees import (
    FOREST_DEFAULTS,
    GBM_DEFAULTS,
    ForestModel,
    GbmModel,
    RegressionTree,
    TreeEnsembleParams,
    forest_fit,
    gbm_fit,
    grow_tree,
)

__all__ = [
    "AdditiveConfig",
    "AdditiveModel",
    "ArimaModel",
    "ENHANCED_DEFAULT_WEIGHTS",
    "EnhancedNaiveModel",
    "FittedModel",
    "ForecastModel",
    "ForestModel",
    "FOREST_DEFAULTS",
    "GBM_DEFAULTS",
    "GbmModel",
    "InHouseModel",
    "KnnModel",
    "RegressionTree",
    "RidgeModel",
    "SeasonalNaiveModel",
    "TreeEnsembleParams",
    "additive_fit",
    "arima_fit",
    "enhanced_naive",
    "forest_fit",
    "gbm_fit",
    "grow_tree",
    "in_house",
    "knn_fit",
    "knn_predict",
    "ridge_fit",
    "seasonal_naive",
]
