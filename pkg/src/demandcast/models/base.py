"""Uniform fit/predict contract shared by every forecaster."""

from __future__ import annotations

from datetime import date
from typing import Sequence

import numpy as np

from ..data import DailySeries
from ..features import FeatureMatrix, FeatureRow


class FittedModel:
    """A trained forecaster. Prediction is pure: same row, same value.

    Subclasses implement the vectorized predict_batch; the row-level predict
    derives from it.
    """

    def predict_batch(self, dates: Sequence[date], X: np.ndarray) -> np.ndarray:
        """Predict one value per row of X (FEATURE_NAMES column order)."""
        raise NotImplementedError

    def predict(self, row: FeatureRow) -> float:
        return float(self.predict_batch([row.date], row.values[None, :])[0])

    def predict_matrix(self, X: FeatureMatrix) -> np.ndarray:
        return self.predict_batch(X.dates, X.X)


class ForecastModel:
    """A forecaster specification that can be fit on history plus features."""

    name: str = "model"

    def fit(self, history: DailySeries, X: FeatureMatrix) -> FittedModel:
        raise NotImplementedError
