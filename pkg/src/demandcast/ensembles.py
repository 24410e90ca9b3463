"""Ensemble combiners: voting, trimmed averaging, stacking, residual correction."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .data import DailySeries
from .errors import InsufficientRows, ModelError, TooFewBases
from .features import FeatureMatrix
from .models.base import FittedModel, ForecastModel

STACKING_BLOCKS = 5
STACKING_MIN_ROWS = 60


def voting_predict(base_predictions: Sequence[float]) -> float:
    """Arithmetic mean of the base predictions."""
    if len(base_predictions) < 2:
        raise TooFewBases(f"voting needs >= 2 base predictions, got {len(base_predictions)}")
    return float(np.mean(base_predictions))


def trimmed_average_predict(base_predictions: Sequence[float]) -> float:
    """Mean after discarding exactly one highest and one lowest prediction."""
    if len(base_predictions) < 3:
        raise TooFewBases(f"trimmed averaging needs >= 3 base predictions, got {len(base_predictions)}")
    ordered = np.sort(np.asarray(base_predictions, dtype=float))
    return float(ordered[1:-1].mean())


class _FittedVoting(FittedModel):
    def __init__(self, fitted_bases: list[FittedModel]):
        self.fitted_bases = fitted_bases

    def predict_batch(self, dates, X):
        stack = np.vstack([f.predict_batch(dates, X) for f in self.fitted_bases])
        return stack.mean(axis=0)


class VotingModel(ForecastModel):
    name = "voting"

    def __init__(self, bases: Sequence[ForecastModel]):
        if len(bases) < 2:
            raise TooFewBases(f"voting needs >= 2 bases, got {len(bases)}")
        self.bases = list(bases)

    def fit(self, history: DailySeries, X: FeatureMatrix) -> FittedModel:
        return _FittedVoting([b.fit(history, X) for b in self.bases])


class _FittedAveraging(FittedModel):
    def __init__(self, fitted_bases: list[FittedModel]):
        self.fitted_bases = fitted_bases

    def predict_batch(self, dates, X):
        stack = np.sort(np.vstack([f.predict_batch(dates, X) for f in self.fitted_bases]), axis=0)
        return stack[1:-1].mean(axis=0)


class AveragingModel(ForecastModel):
    """Trimmed-mean ensemble; must survive discarding the extremes."""

    name = "averaging"

    def __init__(self, bases: Sequence[ForecastModel]):
        if len(bases) < 3:
            raise TooFewBases(f"averaging needs >= 3 bases, got {len(bases)}")
        self.bases = list(bases)

    def fit(self, history: DailySeries, X: FeatureMatrix) -> FittedModel:
        return _FittedAveraging([b.fit(history, X) for b in self.bases])


class FittedStacking(FittedModel):
    def __init__(
        self,
        fitted_bases: list[FittedModel],
        coef: np.ndarray,
        col_mean: np.ndarray,
        intercept: float,
        meta_matrix: np.ndarray,
        meta_y: np.ndarray,
        meta_dates: list,
    ):
        self.fitted_bases = fitted_bases
        self.coef = coef
        self.col_mean = col_mean
        self.intercept = intercept
        # retained for inspection: the out-of-sample meta-training set
        self.meta_matrix = meta_matrix
        self.meta_y = meta_y
        self.meta_dates = meta_dates

    def predict_batch(self, dates, X):
        P = np.column_stack([f.predict_batch(dates, X) for f in self.fitted_bases])
        return self.intercept + (P - self.col_mean) @ self.coef


def stacking_fit(
    bases: Sequence[ForecastModel],
    history: DailySeries,
    X: FeatureMatrix,
    lam: float = 1e-3,
    blocks: int = STACKING_BLOCKS,
) -> FittedStacking:
    """Forward-chained stacking: bases refit on expanding prefixes predict the
    next block; a ridge meta-learner with intercept is fit on those
    out-of-sample predictions; final bases are refit on all data."""
    if len(bases) < 2:
        raise TooFewBases(f"stacking needs >= 2 bases, got {len(bases)}")
    n = len(X)
    if n < STACKING_MIN_ROWS:
        raise InsufficientRows(f"stacking needs >= {STACKING_MIN_ROWS} rows, got {n}")
    block = n // (blocks + 1)
    prefix = n - blocks * block

    preds = []
    targets = []
    dates_oos = []
    for j in range(blocks):
        fit_end = prefix + j * block
        lo, hi = fit_end, fit_end + block
        X_fit = X.head(fit_end)
        sub_history = history.through(X.dates[fit_end - 1])
        fitted = [b.fit(sub_history, X_fit) for b in bases]
        block_dates = X.dates[lo:hi]
        block_X = X.X[lo:hi]
        preds.append(np.column_stack([f.predict_batch(block_dates, block_X) for f in fitted]))
        targets.append(X.y[lo:hi])
        dates_oos.extend(block_dates)

    P = np.vstack(preds)
    y = np.concatenate(targets)
    mu = P.mean(axis=0)
    ybar = float(y.mean())
    Pc = P - mu
    coef = np.linalg.solve(Pc.T @ Pc + lam * np.eye(P.shape[1]), Pc.T @ (y - ybar))
    final = [b.fit(history, X) for b in bases]
    return FittedStacking(final, coef, mu, ybar, P, y, dates_oos)


class StackingModel(ForecastModel):
    name = "stacking"

    def __init__(self, bases: Sequence[ForecastModel], lam: float = 1e-3):
        if len(bases) < 2:
            raise TooFewBases(f"stacking needs >= 2 bases, got {len(bases)}")
        self.bases = list(bases)
        self.lam = lam

    def fit(self, history: DailySeries, X: FeatureMatrix) -> FittedModel:
        return stacking_fit(self.bases, history, X, self.lam)


class _ArCorrector:
    """AR(p) with intercept on a plain value sequence, least squares fit."""

    def __init__(self, values: np.ndarray, p: int):
        values = np.asarray(values, dtype=float)
        self.p = p
        self.recent = list(values[-p:]) if p else []
        # constant residuals forecast themselves; too-short series fall back to their mean
        self._flat = len(values) <= p + 1 or np.ptp(values) == 0.0
        if self._flat:
            self.coef = np.zeros(p + 1)
            self.coef[0] = float(values.mean()) if len(values) else 0.0
            return
        rows = len(values) - p
        design = np.empty((rows, p + 1))
        design[:, 0] = 1.0
        for j in range(1, p + 1):
            design[:, j] = values[p - j : p - j + rows]
        self.coef, *_ = np.linalg.lstsq(design, values[p:], rcond=None)

    def forecast(self, h: int) -> float:
        if self._flat:
            return float(self.coef[0])
        recent = list(self.recent)
        out = 0.0
        for _ in range(h):
            out = float(self.coef[0] + np.asarray(recent[::-1]) @ self.coef[1:])
            recent = (recent + [out])[-self.p :]
        return out


class _EsCorrector:
    """Simple exponential smoothing; the h-step forecast is the final level."""

    def __init__(self, values: np.ndarray, alpha: float):
        if not 0.0 < alpha <= 1.0:
            raise ModelError(f"smoothing alpha must be in (0, 1], got {alpha}")
        level = float(values[0]) if len(values) else 0.0
        for v in values[1:]:
            level = alpha * float(v) + (1.0 - alpha) * level
        self.level = level

    def forecast(self, h: int) -> float:
        return self.level


class FittedResidualCorrection(FittedModel):
    def __init__(self, fitted_base: FittedModel, corrector, train_end):
        self.fitted_base = fitted_base
        self.corrector = corrector
        self.train_end = train_end

    def predict_batch(self, dates, X):
        base = self.fitted_base.predict_batch(dates, X)
        adjust = np.array(
            [self.corrector.forecast((d - self.train_end).days) if d > self.train_end else 0.0 for d in dates]
        )
        return base + adjust


def residual_correct(
    fitted_base: FittedModel,
    history: DailySeries,
    X: FeatureMatrix,
    corrector: str = "smoothing",
    alpha: float = 0.3,
    order: int = 7,
) -> FittedResidualCorrection:
    """Wrap a fitted base model with a forecast of its in-sample residuals.

    corrector is 'smoothing' (exponential smoothing, parameter alpha) or
    'autoreg' (AR(order) by least squares). The correction applies only past
    the training boundary; in-sample predictions pass through unchanged.
    """
    residuals = X.y - fitted_base.predict_matrix(X)
    if corrector == "smoothing":
        corr = _EsCorrector(residuals, alpha)
    elif corrector == "autoreg":
        corr = _ArCorrector(residuals, order)
    else:
        raise ModelError(f"unknown residual corrector {corrector!r}")
    return FittedResidualCorrection(fitted_base, corr, history.end)


class ResidualCorrectionModel(ForecastModel):
    name = "residual"

    def __init__(self, base: ForecastModel, corrector: str = "smoothing", alpha: float = 0.3, order: int = 7):
        self.base = base
        self.corrector = corrector
        self.alpha = alpha
        self.order = order

    def fit(self, history: DailySeries, X: FeatureMatrix) -> FittedModel:
        fitted_base = self.base.fit(history, X)
        return residual_correct(fitted_base, history, X, self.corrector, self.alpha, self.order)
