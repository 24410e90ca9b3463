"""Additive univariate forecaster: piecewise-linear trend, day-of-week and
yearly Fourier seasonality, and per-holiday effects with a post-holiday window.

Fit is penalized least squares on a deterministic design matrix, so identical
inputs always give identical forecasts. Predictions depend only on the date.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from ..data import DailySeries, HolidayCalendar
from ..errors import InsufficientHistory
from ..features import FeatureMatrix
from .base import FittedModel, ForecastModel

MIN_HISTORY_DAYS = 730


@dataclass
class AdditiveConfig:
    fourier_order_yearly: int = 10
    holiday_upper_window: int = 1
    trend_changepoints: int = 10
    penalty: float = 1e-8


class FittedAdditive(FittedModel):
    def __init__(
        self,
        cal: HolidayCalendar,
        config: AdditiveConfig,
        train_start_ord: int,
        train_end_ord: int,
        holiday_terms: list[tuple[str, int]],
        col_mean: np.ndarray,
        col_std: np.ndarray,
        beta: np.ndarray,
        intercept: float,
    ):
        self._cal = cal
        self._config = config
        self._t0 = train_start_ord
        self._t1 = train_end_ord
        self._holiday_terms = holiday_terms
        self._mean = col_mean
        self._std = col_std
        self._beta = beta
        self._intercept = intercept

    def design_rows(self, dates) -> np.ndarray:
        cfg = self._config
        ords = np.array([d.toordinal() for d in dates], dtype=float)
        tau = (ords - self._t0) / max(self._t1 - self._t0, 1)
        cols = [tau]
        for k in range(1, cfg.trend_changepoints + 1):
            c = k / (cfg.trend_changepoints + 1)
            cols.append(np.maximum(0.0, tau - c))
        dow = np.array([d.weekday() for d in dates])
        for w in range(7):
            cols.append((dow == w).astype(float))
        for k in range(1, cfg.fourier_order_yearly + 1):
            angle = 2.0 * np.pi * k * ords / 365.25
            cols.append(np.sin(angle))
            cols.append(np.cos(angle))
        for name, offset in self._holiday_terms:
            flag = np.array(
                [1.0 if self._cal.name_of(d - timedelta(days=offset)) == name else 0.0 for d in dates]
            )
            cols.append(flag)
        return np.column_stack(cols)

    def predict_batch(self, dates, X):
        Z = (self.design_rows(dates) - self._mean) / self._std
        return self._intercept + Z @ self._beta


def additive_fit(
    history: DailySeries,
    cal: HolidayCalendar,
    config: AdditiveConfig | None = None,
) -> FittedAdditive:
    """Fit the additive model on the full training history."""
    config = config or AdditiveConfig()
    if len(history) < MIN_HISTORY_DAYS:
        raise InsufficientHistory(
            f"additive model needs at least {MIN_HISTORY_DAYS} days of history, got {len(history)}"
        )

    train_dates = list(history.dates())
    # holiday terms: one column per (holiday name, day offset) seen in training
    terms = []
    for name in cal.names():
        for offset in range(config.holiday_upper_window + 1):
            hit = any(
                history.start <= d + timedelta(days=offset) <= history.end for d in cal.dates_of(name)
            )
            if hit:
                terms.append((name, offset))

    fitted = FittedAdditive(
        cal,
        config,
        history.start.toordinal(),
        history.end.toordinal(),
        terms,
        col_mean=np.zeros(1),
        col_std=np.ones(1),
        beta=np.zeros(1),
        intercept=0.0,
    )
    D = fitted.design_rows(train_dates)
    mean = D.mean(axis=0)
    std = D.std(axis=0)
    std[std == 0.0] = 1.0
    Z = (D - mean) / std
    ybar = float(history.values.mean())
    yc = history.values - ybar

    # ridge via an augmented least-squares system; SVD keeps the nearly
    # collinear trend/indicator columns numerically stable
    p = Z.shape[1]
    A = np.vstack([Z, np.sqrt(config.penalty) * np.eye(p)])
    b = np.concatenate([yc, np.zeros(p)])
    beta, *_ = np.linalg.lstsq(A, b, rcond=None)

    fitted._mean = mean
    fitted._std = std
    fitted._beta = beta
    fitted._intercept = ybar
    return fitted


class AdditiveModel(ForecastModel):
    name = "additive"

    def __init__(
        self,
        cal: HolidayCalendar,
        fourier_order_yearly: int = 10,
        holiday_upper_window: int = 1,
        trend_changepoints: int = 10,
        penalty: float = 1e-8,
    ):
        self.cal = cal
        self.config = AdditiveConfig(fourier_order_yearly, holiday_upper_window, trend_changepoints, penalty)

    def fit(self, history: DailySeries, X: FeatureMatrix) -> FittedModel:
        return additive_fit(history, self.cal, self.config)
