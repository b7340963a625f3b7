"""Group-wise fairness metrics, observable and counterfactual, and criterion checks.

A metric whose conditioning event is empty is ``None`` ("undefined") rather
than an exception, so reports stay emittable at extreme odds factors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .exceptions import ConfigError, EmptySampleError

METRICS = ("prediction_rate", "ppv", "npv", "fpr", "fnr", "accuracy")
VARIANTS = ("observable", "counterfactual")
GROUPS = (0, 1)
CRITERIA = {
    "demographic_parity": ("prediction_rate",),
    "equalized_odds": ("fpr", "fnr"),
    "predictive_parity": ("ppv", "npv"),
}


@dataclass(frozen=True)
class GroupMetrics:
    prediction_rate: Optional[float] = None
    ppv: Optional[float] = None
    npv: Optional[float] = None
    fpr: Optional[float] = None
    fnr: Optional[float] = None
    accuracy: Optional[float] = None

    def as_dict(self):
        return {m: getattr(self, m) for m in METRICS}


@dataclass(frozen=True)
class MetricReport:
    """Metrics for both groups under one outcome variant.

    ``support`` holds, for empirical reports, the size of each metric's
    conditioning set per group; oracle reports leave it ``None``.
    """

    variant: str
    groups: Dict[int, GroupMetrics]
    support: Optional[Dict[int, Dict[str, int]]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}", "variant")

    @property
    def disparities(self):
        return disparity(self)


def _ratio(num, den):
    return None if den == 0 else num / den


def _group_metrics(r, outcome):
    n = len(r)
    if n == 0:
        return GroupMetrics(), dict.fromkeys(METRICS, 0)
    r1 = r == 1
    o1 = outcome == 1
    n_r1 = int(r1.sum())
    n_o1 = int(o1.sum())
    tp = int((r1 & o1).sum())
    tn = int((~r1 & ~o1).sum())
    fp = n_r1 - tp
    fn = n_o1 - tp
    gm = GroupMetrics(
        prediction_rate=n_r1 / n,
        ppv=_ratio(tp, n_r1),
        npv=_ratio(tn, n - n_r1),
        fpr=_ratio(fp, n - n_o1),
        fnr=_ratio(fn, n_o1),
        accuracy=(tp + tn) / n,
    )
    support = {
        "prediction_rate": n, "ppv": n_r1, "npv": n - n_r1,
        "fpr": n - n_o1, "fnr": n_o1, "accuracy": n,
    }
    return gm, support


def empirical_metrics(samples, pred, outcome="observable", r=None) -> MetricReport:
    """Metrics of ``pred`` on ``samples`` against ``y`` or ``y0``.

    ``r`` may carry precomputed predictions for ``samples`` to avoid
    re-evaluating ``pred``.
    """
    if len(samples) == 0:
        raise EmptySampleError("cannot compute metrics on an empty sample")
    if outcome == "observable":
        if samples.y is None:
            raise ConfigError("observable metrics need an observed sample", "outcome")
        target = samples.y
    elif outcome == "counterfactual":
        target = samples.y0
    else:
        raise ConfigError(f"unknown variant {outcome!r}; expected one of {VARIANTS}", "outcome")
    if r is None:
        r = pred.predict(samples.X)
    r = np.asarray(r)
    groups, support = {}, {}
    for a in GROUPS:
        mask = samples.a == a
        groups[a], support[a] = _group_metrics(r[mask], target[mask])
    return MetricReport(outcome, groups, support)


def disparity(report: MetricReport) -> Dict[str, Optional[float]]:
    """``|group0 - group1|`` per metric; ``None`` if either side is undefined."""
    out = {}
    for m in METRICS:
        v0 = getattr(report.groups[0], m)
        v1 = getattr(report.groups[1], m)
        out[m] = None if v0 is None or v1 is None else abs(v0 - v1)
    return out


@dataclass(frozen=True)
class CriterionResult:
    criterion: str
    status: str  # "pass", "fail" or "indeterminate"
    tol: float
    witnesses: Dict[str, Optional[float]]

    @property
    def passed(self):
        return self.status == "pass"

    def __bool__(self):
        return self.passed


def default_tolerance(report: MetricReport, metrics=METRICS, z=4.0):
    """``z * sqrt(0.25 / n_min)`` over the conditioning sets of ``metrics``."""
    if report.support is None:
        raise ConfigError("report has no support counts; pass tol explicitly", "tol")
    n_min = min(report.support[a][m] for a in GROUPS for m in metrics)
    return math.inf if n_min == 0 else z * math.sqrt(0.25 / n_min)


def check_criterion(report: MetricReport, criterion: str, tol: Optional[float] = None) -> CriterionResult:
    """Check a parity criterion on ``report``.

    ``witnesses`` lists the offending disparities on failure, or the
    undefined ones (as ``None``) when the result is indeterminate.
    """
    if criterion not in CRITERIA:
        raise ConfigError(f"unknown criterion {criterion!r}; expected one of {sorted(CRITERIA)}", "criterion")
    required = CRITERIA[criterion]
    if tol is None:
        tol = default_tolerance(report, required)
    if tol < 0:
        raise ConfigError(f"tol must be >= 0, got {tol}", "tol")
    disp = disparity(report)
    undefined = {m: None for m in required if disp[m] is None}
    if undefined:
        return CriterionResult(criterion, "indeterminate", tol, undefined)
    bad = {m: disp[m] for m in required if disp[m] > tol}
    return CriterionResult(criterion, "fail" if bad else "pass", tol, bad)


@dataclass(frozen=True)
class Comparison:
    group: int
    metric: str
    reference: float
    estimate: float
    bound: float

    @property
    def ok(self):
        return abs(self.estimate - self.reference) <= self.bound


def within_sampling_error(reference: MetricReport, empirical: MetricReport, z=4.0, slack=1e-12):
    """Compare an empirical report to exact values, metric by metric.

    The bound for each metric is ``z * sqrt(p (1 - p) / n)`` with ``p`` the
    exact value and ``n`` the metric's conditioning count. Metrics undefined
    on either side are skipped.
    """
    if empirical.support is None:
        raise ConfigError("empirical report has no support counts", "empirical")
    out = []
    for a in GROUPS:
        for m in METRICS:
            p = getattr(reference.groups[a], m)
            est = getattr(empirical.groups[a], m)
            n = empirical.support[a][m]
            if p is None or est is None or n == 0:
                continue
            bound = z * math.sqrt(max(p * (1.0 - p), 0.0) / n) + slack
            out.append(Comparison(a, m, p, est, bound))
    return out
