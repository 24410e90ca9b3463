"""Benchmark forecasters: the in-house +5% rule, seasonal naive variants, and ARIMA."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..data import DailySeries
from ..errors import ModelError, SingularDesign, WeightsNotNormalized
from ..features import FeatureMatrix, FeatureRow
from .base import FittedModel, ForecastModel

# column positions in FEATURE_NAMES order
_LAG1_COL = 2
_LAG_COLS = slice(0, 5)

ENHANCED_DEFAULT_WEIGHTS = (0.25, 0.15, 0.30, 0.20, 0.10)


def in_house(row: FeatureRow) -> float:
    """The clinics' rule of thumb: last year's value plus 5%."""
    return row.lag1 * 1.05


def seasonal_naive(row: FeatureRow) -> float:
    """Random-walk forecast: the value from the same period one year back."""
    return row.lag1


def check_weights(weights: Sequence[float]) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.shape != (5,):
        raise WeightsNotNormalized(f"need 5 lag weights, got {w.shape}")
    if abs(float(w.sum()) - 1.0) > 1e-9:
        raise WeightsNotNormalized(f"lag weights sum to {w.sum()!r}, expected 1")
    return w


def enhanced_naive(row: FeatureRow, weights: Sequence[float] = ENHANCED_DEFAULT_WEIGHTS) -> float:
    """Weighted mean of the five demand lags."""
    w = check_weights(weights)
    return float(row.values[_LAG_COLS] @ w)


class _RowRuleFitted(FittedModel):
    def __init__(self, rule_vec):
        self._rule_vec = rule_vec

    def predict_batch(self, dates, X):
        return self._rule_vec(np.asarray(X, dtype=float))


class InHouseModel(ForecastModel):
    """Benchmark approximating the clinics' current estimation strategy."""

    name = "current"

    def fit(self, history: DailySeries, X: FeatureMatrix) -> FittedModel:
        return _RowRuleFitted(lambda X: X[:, _LAG1_COL] * 1.05)


class SeasonalNaiveModel(ForecastModel):
    name = "naive"

    def fit(self, history: DailySeries, X: FeatureMatrix) -> FittedModel:
        return _RowRuleFitted(lambda X: X[:, _LAG1_COL].copy())


class EnhancedNaiveModel(ForecastModel):
    name = "naive_enhanced"

    def __init__(self, weights: Sequence[float] = ENHANCED_DEFAULT_WEIGHTS):
        self.weights = check_weights(weights)

    def fit(self, history: DailySeries, X: FeatureMatrix) -> FittedModel:
        w = self.weights
        return _RowRuleFitted(lambda X: X[:, _LAG_COLS] @ w)


class FittedArima(FittedModel):
    """AR(p) on the d-times differenced series, integrated forward recursively.

    Out-of-sample prediction for a date h days past the training boundary is
    the h-step integrated forecast; the lag features of the row are ignored.
    In-sample dates get one-step fitted values so the model stays usable under
    residual correction and the explain tooling.
    """

    def __init__(self, history: DailySeries, p: int, d: int, coef: np.ndarray):
        self._history = history
        self._p = p
        self._d = d
        self._coef = coef  # [intercept, phi_1..phi_p]
        y = history.values.astype(float)
        self._z = np.diff(y, n=d) if d else y.copy()
        # last value of every differencing level 0..d-1, updated as forecasts extend
        self._diff_state = [float(np.diff(y, n=k)[-1]) for k in range(d)]
        self._z_recent = list(self._z[-p:]) if p else []
        self._forecasts: list[float] = []
        self._insample = self._fitted_insample(y)

    def _ar_step(self, recent: Sequence[float]) -> float:
        # recent holds the p latest z values, most recent last
        if not self._p:
            return float(self._coef[0])
        return float(self._coef[0] + np.asarray(recent)[::-1] @ self._coef[1:])

    def _fitted_insample(self, y: np.ndarray) -> np.ndarray:
        p, d = self._p, self._d
        diffs = [np.diff(y, n=k) for k in range(d)]  # level 0 is y itself
        fitted = y.copy()  # the first p+d days fall back to observed values
        for t in range(p, len(self._z)):
            level = self._ar_step(self._z[t - p : t])
            for k in range(1, d + 1):
                level += diffs[d - k][t + k - 1]
            fitted[t + d] = level
        return fitted

    def forecast(self, h: int) -> float:
        """h-step-ahead level forecast past the training boundary (h >= 1)."""
        if h < 1:
            raise ModelError(f"forecast horizon must be >= 1, got {h}")
        while len(self._forecasts) < h:
            zhat = self._ar_step(self._z_recent)
            if self._p:
                self._z_recent = (self._z_recent + [zhat])[-self._p :]
            value = zhat
            for k in range(self._d - 1, -1, -1):
                value = self._diff_state[k] + value
                self._diff_state[k] = value
            self._forecasts.append(value)
        return self._forecasts[h - 1]

    def predict_batch(self, dates, X):
        out = np.empty(len(dates))
        train_end = self._history.end
        for i, d in enumerate(dates):
            h = (d - train_end).days
            if h >= 1:
                out[i] = self.forecast(h)
            elif d in self._history:
                out[i] = self._insample[self._history.index_of(d)]
            else:
                raise ModelError(f"ARIMA cannot predict {d.isoformat()}: before training history")
        return out


def arima_fit(history: DailySeries, p: int = 7, d: int = 1) -> FittedArima:
    """Fit AR(p) with intercept by least squares on the d-times differenced series."""
    if len(history) <= p + d + 10:
        raise ModelError(f"ARIMA({p},{d},0) needs more than {p + d + 10} observations, got {len(history)}")
    z = np.diff(history.values, n=d) if d else history.values.astype(float)
    if np.ptp(z) == 0.0:
        # degenerate but well defined: constant differences forecast themselves
        coef = np.zeros(p + 1)
        coef[0] = float(z[0]) if len(z) else 0.0
        return FittedArima(history, p, d, coef)
    rows = len(z) - p
    design = np.empty((rows, p + 1))
    design[:, 0] = 1.0
    for j in range(1, p + 1):
        design[:, j] = z[p - j : p - j + rows]
    target = z[p:]
    gram = design.T @ design
    if np.linalg.matrix_rank(gram) < p + 1:
        raise SingularDesign("collinear lag matrix in ARIMA fit")
    coef = np.linalg.solve(gram, design.T @ target)
    return FittedArima(history, p, d, coef)


class ArimaModel(ForecastModel):
    name = "arima"

    def __init__(self, p: int = 7, d: int = 1):
        self.p = p
        self.d = d

    def fit(self, history: DailySeries, X: FeatureMatrix) -> FittedModel:
        return arima_fit(history, self.p, self.d)
