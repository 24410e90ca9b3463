"""CART regression trees with exact greedy variance-reduction splits,
plus the bagged random forest and squared-loss gradient boosting built on them.

Trees grow level by level with all split searches vectorized across the
level's nodes: per feature, samples stay grouped by node and sorted by value,
so candidate splits reduce to segmented prefix sums. Tie rule: the first
best position in value order, then the lowest feature index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..data import DailySeries
from ..errors import ModelError
from ..features import FeatureMatrix
from .base import FittedModel, ForecastModel

_UNLIMITED = 1 << 30


@dataclass
class TreeEnsembleParams:
    """Knobs shared by the forest and boosting learners."""

    n_trees: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 1
    feature_subsample: float = 1.0
    bootstrap: bool = False
    learning_rate: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 0:
            raise ModelError(f"n_trees must be >= 0, got {self.n_trees}")
        if self.max_depth is not None and self.max_depth < 1:
            raise ModelError(f"max_depth must be >= 1 or None, got {self.max_depth}")
        if self.min_samples_leaf < 1:
            raise ModelError(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")
        if not 0.0 < self.feature_subsample <= 1.0:
            raise ModelError(f"feature_subsample must be in (0, 1], got {self.feature_subsample}")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ModelError(f"learning_rate must be in (0, 1], got {self.learning_rate}")


FOREST_DEFAULTS = dict(n_trees=300, max_depth=None, min_samples_leaf=2, feature_subsample=1 / 3, bootstrap=True)
GBM_DEFAULTS = dict(n_trees=500, max_depth=4, min_samples_leaf=1, feature_subsample=1.0, learning_rate=0.05)


class RegressionTree:
    """Flat-array binary tree; slot i is a leaf iff feature[i] < 0."""

    __slots__ = ("feature", "threshold", "left", "right", "value", "_lists")

    def __init__(self, feature, threshold, left, right, value):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.value = value
        self._lists = (feature.tolist(), threshold.tolist(), left.tolist(), right.tolist(), value.tolist())

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if len(X) <= 16:
            feat, thr, left, right, val = self._lists
            out = np.empty(len(X))
            for i, x in enumerate(X):
                j = 0
                while feat[j] >= 0:
                    j = left[j] if x[feat[j]] <= thr[j] else right[j]
                out[i] = val[j]
            return out
        node = np.zeros(len(X), dtype=np.int32)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            f = self.feature[nd]
            go_left = X[idx, f] <= self.threshold[nd]
            nxt = np.where(go_left, self.left[nd], self.right[nd])
            node[idx] = nxt
            active[idx] = self.feature[nxt] >= 0
        return self.value[node]


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: int | None,
    min_samples_leaf: int,
    mtry: int,
    rng: np.random.Generator,
) -> RegressionTree:
    """Grow one exact-greedy CART regression tree.

    mtry features are drawn per split node; thresholds are midpoints between
    adjacent distinct sorted values and route via ``x <= threshold``.
    """
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    n, d = X.shape
    depth_cap = _UNLIMITED if max_depth is None else max_depth

    cap = 2 * n + 1
    feat = np.full(cap, -1, dtype=np.int32)
    thr = np.zeros(cap)
    left = np.zeros(cap, dtype=np.int32)
    right = np.zeros(cap, dtype=np.int32)
    val = np.zeros(cap)
    n_slots = 1

    # per-feature sample order, grouped by node segment, value-sorted within
    orders = np.vstack([np.argsort(X[:, f], kind="stable") for f in range(d)])
    seg_slots = np.array([0], dtype=np.intp)
    seg_sizes = np.array([n], dtype=np.intp)
    depth = 0

    while seg_slots.size:
        starts = np.concatenate(([0], np.cumsum(seg_sizes)))
        y0 = y[orders[0]]
        seg_sum = np.add.reduceat(y0, starts[:-1])
        seg_min = np.minimum.reduceat(y0, starts[:-1])
        seg_max = np.maximum.reduceat(y0, starts[:-1])
        splittable = (seg_sizes >= 2 * min_samples_leaf) & (seg_min < seg_max) & (depth < depth_cap)

        done = ~splittable
        if done.any():
            val[seg_slots[done]] = seg_sum[done] / seg_sizes[done]
        if not splittable.any():
            break

        # compact every order row down to the splittable segments
        pos_seg = np.repeat(np.arange(seg_slots.size), seg_sizes)
        pos_keep = splittable[pos_seg]
        m = int(pos_keep.sum())
        orders = orders[:, pos_keep]
        act_slots = seg_slots[splittable]
        act_sizes = seg_sizes[splittable]
        act_sum = seg_sum[splittable]
        ka = act_slots.size
        astarts = np.concatenate(([0], np.cumsum(act_sizes)))
        seg_of = np.repeat(np.arange(ka), act_sizes)

        loc = np.arange(m) - astarts[seg_of]
        left_cnt = loc + 1.0
        right_cnt = act_sizes[seg_of] - left_cnt
        cnt_ok = (left_cnt >= min_samples_leaf) & (right_cnt >= min_samples_leaf)
        seg_total = act_sum[seg_of]
        positions = np.arange(m)

        best_score = np.full((ka, d), -np.inf)
        best_pos = np.zeros((ka, d), dtype=np.intp)
        for f in range(d):
            of = orders[f]
            xa = X[of, f]
            cs = np.cumsum(y[of])
            base = np.concatenate(([0.0], cs[astarts[1:-1] - 1]))
            ls = cs - base[seg_of]
            distinct = np.empty(m, dtype=bool)
            distinct[:-1] = xa[:-1] < xa[1:]
            distinct[-1] = False
            valid = cnt_ok & distinct & (right_cnt > 0)
            rs = seg_total - ls
            with np.errstate(divide="ignore", invalid="ignore"):
                score = ls * ls / left_cnt + rs * rs / right_cnt
            score = np.where(valid, score, -np.inf)
            seg_best = np.maximum.reduceat(score, astarts[:-1])
            hit = (score == seg_best[seg_of]) & np.isfinite(score)
            cand = np.where(hit, positions, m)
            first = np.minimum.reduceat(cand, astarts[:-1])
            found = first < m
            best_score[found, f] = seg_best[found]
            best_pos[found, f] = first[found]

        if mtry < d:
            keys = rng.random((ka, d))
            kth = np.partition(keys, mtry - 1, axis=1)[:, mtry - 1 : mtry]
            best_score[keys > kth] = -np.inf

        fstar = np.argmax(best_score, axis=1)
        has_split = best_score[np.arange(ka), fstar] > -np.inf
        no_split = ~has_split
        if no_split.any():
            val[act_slots[no_split]] = act_sum[no_split] / act_sizes[no_split]
        split_idx = np.flatnonzero(has_split)
        s = split_idx.size
        if s == 0:
            break

        fsel = fstar[split_idx]
        pos_sel = best_pos[split_idx, fsel]
        a = X[orders[fsel, pos_sel], fsel]
        b = X[orders[fsel, pos_sel + 1], fsel]
        t = a + (b - a) / 2.0
        t = np.where(t >= b, a, t)  # guard against float midpoint collapsing onto b

        slots = act_slots[split_idx]
        lchild = n_slots + 2 * np.arange(s)
        rchild = lchild + 1
        feat[slots] = fsel
        thr[slots] = t
        left[slots] = lchild
        right[slots] = rchild
        n_slots += 2 * s

        # route each sample of a splitting segment to its child segment
        rank_of_seg = np.full(ka, -1, dtype=np.intp)
        rank_of_seg[split_idx] = np.arange(s)
        sample_rank = rank_of_seg[seg_of]  # aligned with orders[0]
        samples0 = orders[0]
        new_seg_of_sample = np.full(n, -1, dtype=np.intp)
        in_split = sample_rank >= 0
        samp = samples0[in_split]
        r = sample_rank[in_split]
        side_right = (X[samp, fsel[r]] > t[r]).astype(np.intp)
        new_seg_of_sample[samp] = 2 * r + side_right

        keys2 = new_seg_of_sample[orders]
        keep2 = keys2 >= 0
        m2 = int(keep2[0].sum())
        orders = orders[keep2].reshape(d, m2)
        keys2 = keys2[keep2].reshape(d, m2)
        sorter = np.argsort(keys2, axis=1, kind="stable")
        orders = np.take_along_axis(orders, sorter, axis=1)

        lc = (pos_sel - astarts[split_idx] + 1).astype(np.intp)
        seg_slots = np.empty(2 * s, dtype=np.intp)
        seg_slots[0::2] = lchild
        seg_slots[1::2] = rchild
        seg_sizes = np.empty(2 * s, dtype=np.intp)
        seg_sizes[0::2] = lc
        seg_sizes[1::2] = act_sizes[split_idx] - lc
        depth += 1

    return RegressionTree(feat[:n_slots], thr[:n_slots], left[:n_slots], right[:n_slots], val[:n_slots])


def _mtry(params: TreeEnsembleParams, d: int) -> int:
    return max(1, math.ceil(params.feature_subsample * d))


class FittedForest(FittedModel):
    def __init__(self, trees: list[RegressionTree]):
        self.trees = trees

    def predict_batch(self, dates, X):
        X = np.asarray(X, dtype=float)
        total = np.zeros(len(X))
        for tree in self.trees:
            total += tree.predict(X)
        return total / len(self.trees)


def forest_fit(X: FeatureMatrix, params: TreeEnsembleParams) -> FittedForest:
    """Bagged CART regression trees with per-split feature subsampling."""
    n, d = X.X.shape
    if n < 2 * params.min_samples_leaf:
        raise ModelError(f"forest needs at least {2 * params.min_samples_leaf} rows, got {n}")
    if params.n_trees < 1:
        raise ModelError("forest needs at least one tree")
    rng = np.random.default_rng(params.seed)
    mtry = _mtry(params, d)
    trees = []
    for _ in range(params.n_trees):
        if params.bootstrap:
            rows = rng.integers(0, n, size=n)
            Xb, yb = X.X[rows], X.y[rows]
        else:
            Xb, yb = X.X, X.y
        trees.append(grow_tree(Xb, yb, params.max_depth, params.min_samples_leaf, mtry, rng))
    return FittedForest(trees)


class FittedGbm(FittedModel):
    def __init__(self, init: float, learning_rate: float, trees: list[RegressionTree]):
        self.init = init
        self.learning_rate = learning_rate
        self.trees = trees

    def predict_batch(self, dates, X):
        X = np.asarray(X, dtype=float)
        out = np.full(len(X), self.init)
        for tree in self.trees:
            out += self.learning_rate * tree.predict(X)
        return out


def gbm_fit(X: FeatureMatrix, params: TreeEnsembleParams) -> FittedGbm:
    """Squared-loss gradient boosting: depth-limited trees fit to residuals."""
    n, d = X.X.shape
    if n < 2:
        raise ModelError(f"gradient boosting needs at least 2 rows, got {n}")
    rng = np.random.default_rng(params.seed)
    mtry = _mtry(params, d)
    init = float(X.y.mean())
    pred = np.full(n, init)
    trees = []
    for _ in range(params.n_trees):
        residual = X.y - pred
        if params.bootstrap:
            rows = rng.integers(0, n, size=n)
            tree = grow_tree(X.X[rows], residual[rows], params.max_depth, params.min_samples_leaf, mtry, rng)
        else:
            tree = grow_tree(X.X, residual, params.max_depth, params.min_samples_leaf, mtry, rng)
        pred += params.learning_rate * tree.predict(X.X)
        trees.append(tree)
    return FittedGbm(init, params.learning_rate, trees)


class ForestModel(ForecastModel):
    name = "forest"

    def __init__(self, seed: int = 0, **overrides):
        merged = {**FOREST_DEFAULTS, **overrides}
        self.params = TreeEnsembleParams(seed=seed, **merged)

    def fit(self, history: DailySeries, X: FeatureMatrix) -> FittedModel:
        return forest_fit(X, self.params)


class GbmModel(ForecastModel):
    name = "gbm"

    def __init__(self, seed: int = 0, **overrides):
        merged = {**GBM_DEFAULTS, **overrides}
        self.params = TreeEnsembleParams(seed=seed, **merged)

    def fit(self, history: DailySeries, X: FeatureMatrix) -> FittedModel:
        return gbm_fit(X, self.params)
