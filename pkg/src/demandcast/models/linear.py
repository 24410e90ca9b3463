"""Ridge regression and k-nearest-neighbour forecasters on standardized features."""

from __future__ import annotations

import numpy as np

from ..data import DailySeries
from ..errors import KTooLarge, SingularDesign
from ..features import FeatureMatrix, FeatureRow
from .base import FittedModel, ForecastModel


def standardize_params(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and stds; zero-variance columns get std 1 so they center to 0."""
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0.0] = 1.0
    return mean, std


class FittedRidge(FittedModel):
    def __init__(self, mean: np.ndarray, std: np.ndarray, beta: np.ndarray, intercept: float):
        self.mean = mean
        self.std = std
        self.beta = beta
        self.intercept = intercept

    def predict_batch(self, dates, X):
        Z = (np.asarray(X, dtype=float) - self.mean) / self.std
        return self.intercept + Z @ self.beta


def ridge_fit(X: FeatureMatrix, lam: float) -> FittedRidge:
    """Solve (Z'Z + lam*I) beta = Z'y in standardized feature space.

    The intercept is unpenalized: with centered y it is exactly mean(y).
    lam = 0 demands a full-rank standardized design.
    """
    if lam < 0:
        raise ValueError(f"ridge penalty must be >= 0, got {lam}")
    if len(X) < 2:
        raise SingularDesign("ridge needs at least 2 rows")
    mean, std = standardize_params(X.X)
    Z = (X.X - mean) / std
    ybar = float(X.y.mean())
    yc = X.y - ybar
    gram = Z.T @ Z
    if lam == 0.0 and np.linalg.matrix_rank(gram) < Z.shape[1]:
        raise SingularDesign("feature matrix is rank-deficient and lambda is 0")
    beta = np.linalg.solve(gram + lam * np.eye(Z.shape[1]), Z.T @ yc)
    return FittedRidge(mean, std, beta, ybar)


class RidgeModel(ForecastModel):
    name = "ridge"

    def __init__(self, lam: float = 1.0):
        self.lam = lam

    def fit(self, history: DailySeries, X: FeatureMatrix) -> FittedModel:
        return ridge_fit(X, self.lam)


class FittedKnn(FittedModel):
    """Mean target of the k nearest training rows in standardized Euclidean space.

    Distance ties resolve toward the earlier training date.
    """

    def __init__(self, Z: np.ndarray, y: np.ndarray, mean: np.ndarray, std: np.ndarray, k: int):
        self.Z = Z  # training rows, date-ordered, standardized
        self.y = y
        self.mean = mean
        self.std = std
        self.k = k

    def predict_batch(self, dates, X):
        Q = (np.asarray(X, dtype=float) - self.mean) / self.std
        out = np.empty(len(Q))
        order_tiebreak = np.arange(len(self.Z))
        for i, q in enumerate(Q):
            dist = np.sqrt(((self.Z - q) ** 2).sum(axis=1))
            nearest = np.lexsort((order_tiebreak, dist))[: self.k]
            out[i] = self.y[nearest].mean()
        return out


def knn_fit(X: FeatureMatrix, k: int) -> FittedKnn:
    if k > len(X):
        raise KTooLarge(f"k={k} exceeds {len(X)} training rows")
    if k < 1:
        raise KTooLarge(f"k must be >= 1, got {k}")
    mean, std = standardize_params(X.X)
    return FittedKnn((X.X - mean) / std, X.y.copy(), mean, std, k)


def knn_predict(X: FeatureMatrix, row: FeatureRow, k: int) -> float:
    """One-off k-NN prediction for a single feature row."""
    return knn_fit(X, k).predict(row)


class KnnModel(ForecastModel):
    name = "knn"

    def __init__(self, k: int = 5):
        self.k = k

    def fit(self, history: DailySeries, X: FeatureMatrix) -> FittedModel:
        return knn_fit(X, self.k)
