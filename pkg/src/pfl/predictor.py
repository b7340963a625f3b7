"""Binary classifiers ``R(a, x1, x2) -> {0, 1}`` as scikit-learn estimators.

Both estimators take feature matrices with columns ``(a, x1, x2)`` (see
:attr:`pfl.population.Sample.X`) and compose with the usual sklearn
machinery (``get_params``, ``clone``, pipelines).
"""
from __future__ import annotations

import itertools

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import FEATURE_NAMES, check_binary_array, check_features
from .exceptions import ConfigError, EmptySampleError, FitError, PartitionMismatchError

PLUGIN_FEATURES = ("a", "x1")


class PluginPredictor(ClassifierMixin, BaseEstimator):
    """Thresholded plug-in regression of ``y`` on discrete features.

    For every combination of the selected feature values the fitted table
    holds 1 iff the empirical mean of ``y`` in that stratum is at least
    ``threshold``.

    Parameters
    ----------
    features : tuple of str
        Subset of ``("a", "x1")`` to stratify on.
    threshold : float
        Cut applied to the stratum means; ties map to 1.

    Attributes
    ----------
    table_ : dict
        Maps a tuple of feature values (ordered as ``features``) to 0 or 1.
    """

    kind = "plugin_table"

    def __init__(self, features=("x1",), threshold=0.5):
        self.features = features
        self.threshold = threshold

    def _check_params(self):
        feats = tuple(self.features)
        if not feats or len(set(feats)) != len(feats) or not set(feats) <= set(PLUGIN_FEATURES):
            raise ConfigError(
                f"features must be a non-empty subset of {PLUGIN_FEATURES}, got {feats}", "features"
            )
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError(f"threshold must be in [0, 1], got {self.threshold}", "threshold")
        return feats

    def fit(self, X, y):
        feats = self._check_params()
        X = check_features(X)
        y = check_binary_array(y)
        if len(y) != X.shape[0]:
            raise FitError(f"X has {X.shape[0]} rows but y has {len(y)}")
        if len(y) == 0:
            raise EmptySampleError("cannot fit on an empty sample")
        cols = X[:, [FEATURE_NAMES.index(f) for f in feats]]
        table = {}
        for values in itertools.product((0, 1), repeat=len(feats)):
            mask = np.all(cols == np.array(values), axis=1)
            if not mask.any():
                stratum = ", ".join(f"{f}={v}" for f, v in zip(feats, values))
                raise FitError(f"empty stratum ({stratum}) in training sample")
            table[values] = int(y[mask].mean() >= self.threshold)
        self.table_ = table
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    @classmethod
    def from_table(cls, features, table):
        """Build a fitted predictor from an explicit lookup table."""
        est = cls(features=tuple(features))
        feats = est._check_params()
        table = {tuple(int(v) for v in k): int(r) for k, r in dict(table).items()}
        expected = set(itertools.product((0, 1), repeat=len(feats)))
        if set(table) != expected:
            raise ConfigError(f"table must cover exactly {sorted(expected)}", "table")
        if any(r not in (0, 1) for r in table.values()):
            raise ConfigError("table values must be 0 or 1", "table")
        est.table_ = table
        est.classes_ = np.array([0, 1])
        est.n_features_in_ = len(FEATURE_NAMES)
        return est

    def predict(self, X):
        check_is_fitted(self, "table_")
        X = check_features(X)
        feats = tuple(self.features)
        cols = X[:, [FEATURE_NAMES.index(f) for f in feats]].astype(np.int64)
        # dense lookup over the binary feature code
        code = cols @ (1 << np.arange(len(feats))[::-1])
        dense = np.empty(1 << len(feats), dtype=np.int8)
        for values, r in self.table_.items():
            dense[int("".join(map(str, values)), 2)] = r
        return dense[code]

    def predict_cell(self, a, x1, x2bin):
        check_is_fitted(self, "table_")
        values = {"a": a, "x1": x1}
        return self.table_[tuple(values[f] for f in self.features)]

    def to_dict(self):
        check_is_fitted(self, "table_")
        rows = [dict(zip(self.features, k), r=r) for k, r in sorted(self.table_.items())]
        return {"kind": self.kind, "features": list(self.features), "table": rows}


class ThresholdPredictor(ClassifierMixin, BaseEstimator):
    """``R = 1{x2 >= threshold}``; stateless, so usable without ``fit``."""

    kind = "x2_threshold"

    def __init__(self, threshold=0.5):
        self.threshold = threshold

    def fit(self, X, y=None):
        check_features(X)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = len(FEATURE_NAMES)
        return self

    def __sklearn_is_fitted__(self):
        return True

    def predict(self, X):
        X = check_features(X)
        return (X[:, 2] >= self.threshold).astype(np.int8)

    def predict_cell(self, a, x1, x2bin):
        return int(x2bin)

    def to_dict(self):
        return {"kind": self.kind, "threshold": float(self.threshold)}


def fit_plugin(samples, features=("x1",), threshold=0.5) -> PluginPredictor:
    """Fit :class:`PluginPredictor` on the observed outcomes of ``samples``."""
    if len(samples) == 0:
        raise EmptySampleError("cannot fit on an empty sample")
    if samples.y is None:
        raise FitError("samples must be observed (d and y set) before fitting")
    return PluginPredictor(features=tuple(features), threshold=threshold).fit(samples.X, samples.y)


def predict(p, a, x1, x2):
    """Evaluate ``p`` on scalars or equal-length arrays; returns int or int8 array."""
    scalar = np.ndim(a) == 0 and np.ndim(x1) == 0 and np.ndim(x2) == 0
    X = np.column_stack(np.broadcast_arrays(np.atleast_1d(a), np.atleast_1d(x1), np.atleast_1d(x2)))
    out = p.predict(X.astype(np.float64))
    return int(out[0]) if scalar else out


def partition_on(p, cells) -> dict:
    """Per-cell prediction, keyed by ``(a, x1, x2bin)``.

    Raises :class:`PartitionMismatchError` when ``p`` is not constant on
    every cell, i.e. a threshold predictor cutting ``x2`` anywhere other than
    ``cells.x2_threshold``.
    """
    if isinstance(p, ThresholdPredictor):
        if float(p.threshold) != cells.x2_threshold:
            raise PartitionMismatchError(
                f"predictor cuts x2 at {p.threshold} but cells are split at {cells.x2_threshold}"
            )
    elif isinstance(p, PluginPredictor):
        check_is_fitted(p, "table_")
    else:
        raise PartitionMismatchError(f"no cell partition known for {type(p).__name__}")
    return {c.key: p.predict_cell(*c.key) for c in cells}


def predictor_from_dict(data):
    """Inverse of ``to_dict`` for both predictor kinds."""
    kind = data.get("kind")
    if kind == ThresholdPredictor.kind:
        unknown = sorted(set(data) - {"kind", "threshold"})
        if unknown:
            raise ConfigError(f"unknown field(s) {unknown}", "predictor")
        thr = data.get("threshold", 0.5)
        if isinstance(thr, bool) or not isinstance(thr, (int, float)):
            raise ConfigError(f"expected a real, got {thr!r}", "predictor.threshold")
        return ThresholdPredictor(float(thr))
    if kind == PluginPredictor.kind:
        feats = data.get("features")
        rows = data.get("table")
        if feats is None or rows is None:
            raise ConfigError("plugin_table needs 'features' and 'table'", "predictor")
        try:
            table = {tuple(row[f] for f in feats): row["r"] for row in rows}
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed table row: {exc}", "predictor.table") from None
        return PluginPredictor.from_table(feats, table)
    raise ConfigError(f"unknown predictor kind {kind!r}", "predictor.kind")
