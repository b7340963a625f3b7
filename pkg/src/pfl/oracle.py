"""Exact metric values by enumeration of the cell table.

Under consistency and conditional ignorability of the decision, the
observed-outcome regression in a cell is

    gamma_t(w) = (1 - pi_t(w)) mu0(w) + pi_t(w) mu1(w),

so every metric of a predictor that is constant on cells is a ratio of
mass-weighted sums of ``gamma_t`` (observable variant) or ``mu0``
(counterfactual variant). Only ``gamma_t`` involves the policy; the
prediction rates and all counterfactual metrics never touch it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Tuple

from .exceptions import DomainError
from .metrics import GROUPS, GroupMetrics, MetricReport
from .policy import DecisionPolicy
from .predictor import partition_on


@dataclass(frozen=True)
class OracleContext:
    cells: object
    policy: DecisionPolicy
    rmap: Dict[Tuple[int, int, int], int]

    def __post_init__(self):
        for c in self.cells:
            if c.key not in self.rmap:
                raise DomainError(f"rmap does not cover cell {c.key}")
            self.policy(c.key)

    @classmethod
    def build(cls, cells, policy, pred):
        return cls(cells, policy, partition_on(pred, cells))


def _key(cell):
    return cell if isinstance(cell, tuple) else cell.key


def gamma(ctx: OracleContext, cell) -> float:
    c = ctx.cells[_key(cell)]
    pi = ctx.policy(c.key)
    return (1.0 - pi) * c.mu0 + pi * c.mu1


def _average(ctx, a, x1, x2bin, value):
    cells = [c for c in ctx.cells if (c.a, c.x1, c.x2bin) == (a, x1, x2bin)]
    den = math.fsum(c.mass for c in cells)
    if den == 0:
        raise DomainError(f"(a={a}, x1={x1}, x2bin={x2bin}) has zero mass")
    return math.fsum(c.mass * value(c) for c in cells) / den


def conditional_outcome(ctx: OracleContext, a, x1, x2bin) -> float:
    """``E_t[Y | A, X]``: the mass-weighted mean of ``gamma`` over matching cells."""
    return _average(ctx, a, x1, x2bin, lambda c: gamma(ctx, c))


def _regression(ctx, counterfactual):
    if counterfactual:
        return lambda c: _average(ctx, c.a, c.x1, c.x2bin, lambda w: w.mu0)
    return lambda c: conditional_outcome(ctx, c.a, c.x1, c.x2bin)


def _group(ctx, a):
    cells = [c for c in ctx.cells if c.a == a]
    if math.fsum(c.mass for c in cells) == 0:
        raise DomainError(f"group {a} has zero mass")
    return cells


def _ratio(num, den):
    den = math.fsum(den)
    return None if den == 0 else math.fsum(num) / den


def prediction_rate(ctx: OracleContext, a) -> float:
    cells = _group(ctx, a)
    return _ratio([c.mass * ctx.rmap[c.key] for c in cells], [c.mass for c in cells])


def predictive_values(ctx: OracleContext, a, counterfactual=False):
    """``(ppv, npv)`` for group ``a``; a component is ``None`` when its stratum is empty."""
    reg = _regression(ctx, counterfactual)
    cells = [c for c in ctx.cells if c.a == a]
    pos = [c for c in cells if ctx.rmap[c.key] == 1]
    neg = [c for c in cells if ctx.rmap[c.key] == 0]
    ppv = _ratio([c.mass * reg(c) for c in pos], [c.mass for c in pos])
    neg_rate = _ratio([c.mass * reg(c) for c in neg], [c.mass for c in neg])
    return ppv, None if neg_rate is None else 1.0 - neg_rate


def error_rates(ctx: OracleContext, a, counterfactual=False):
    """``(fpr, fnr)`` for group ``a``."""
    reg = _regression(ctx, counterfactual)
    cells = [c for c in ctx.cells if c.a == a]
    g = {c.key: reg(c) for c in cells}
    r = ctx.rmap
    fpr = _ratio([c.mass * r[c.key] * (1.0 - g[c.key]) for c in cells],
                 [c.mass * (1.0 - g[c.key]) for c in cells])
    fnr = _ratio([c.mass * (1 - r[c.key]) * g[c.key] for c in cells],
                 [c.mass * g[c.key] for c in cells])
    return fpr, fnr


def accuracy(ctx: OracleContext, a, counterfactual=False) -> float:
    reg = _regression(ctx, counterfactual)
    cells = _group(ctx, a)
    terms = []
    for c in cells:
        g = reg(c)
        terms.append(c.mass * (g if ctx.rmap[c.key] else 1.0 - g))
    return _ratio(terms, [c.mass for c in cells])


def observable_metrics(ctx: OracleContext, a) -> GroupMetrics:
    ppv, npv = predictive_values(ctx, a)
    fpr, fnr = error_rates(ctx, a)
    return GroupMetrics(prediction_rate(ctx, a), ppv, npv, fpr, fnr, accuracy(ctx, a))


def counterfactual_metrics(ctx: OracleContext, a) -> GroupMetrics:
    """All metrics with ``mu0`` in place of ``gamma``; ``ctx.policy`` is not read."""
    ppv, npv = predictive_values(ctx, a, counterfactual=True)
    fpr, fnr = error_rates(ctx, a, counterfactual=True)
    return GroupMetrics(prediction_rate(ctx, a), ppv, npv, fpr, fnr, accuracy(ctx, a, counterfactual=True))


def oracle_report(ctx: OracleContext, variant="observable") -> MetricReport:
    fn = counterfactual_metrics if variant == "counterfactual" else observable_metrics
    return MetricReport(variant, {a: fn(ctx, a) for a in GROUPS})
