"""Treatment propensities over cells and the interventions that move them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Optional

import numpy as np

from . import rng
from ._validation import check_binary, check_positive, check_probability
from .exceptions import ConfigError, DomainError


def odds_multiply(p, k):
    """Multiply the odds of ``p`` by ``k``: ``k p / (1 - p + k p)``.

    0 and 1 are fixed points for every ``k``; ``k = inf`` sends any other
    ``p`` to 1.
    """
    if isinstance(k, bool) or not isinstance(k, (int, float)) or math.isnan(k) or k <= 0:
        raise DomainError(f"odds factor must be > 0, got {k!r}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must be in [0, 1], got {p!r}")
    if p == 0.0 or p == 1.0 or k == 1:
        return float(p)
    if math.isinf(k):
        return 1.0
    return k * p / (1.0 - p + k * p)


class DecisionPolicy:
    """Immutable map from cell key ``(a, x1, x2bin)`` to P(D = 1 | cell)."""

    __slots__ = ("_prop", "_dense")

    def __init__(self, propensity: Mapping):
        prop = {}
        for key, value in propensity.items():
            key = tuple(int(v) for v in key)
            if len(key) != 3:
                raise ConfigError(f"cell key must be (a, x1, x2bin), got {key}", "propensity")
            prop[key] = check_probability(value, f"propensity{key}")
        dense = np.full(8, np.nan)
        for (a, x1, xb), value in prop.items():
            dense[4 * a + 2 * x1 + xb] = value
        self._prop = MappingProxyType(prop)
        self._dense = dense
        self._dense.setflags(write=False)

    @property
    def propensity(self):
        return self._prop

    def __call__(self, key):
        try:
            return self._prop[tuple(key)]
        except KeyError:
            raise DomainError(f"policy does not cover cell {tuple(key)}") from None

    def __eq__(self, other):
        return isinstance(other, DecisionPolicy) and dict(self._prop) == dict(other._prop)

    def __hash__(self):
        return hash(tuple(sorted(self._prop.items())))

    def __repr__(self):
        return f"DecisionPolicy({dict(self._prop)!r})"

    def covers(self, cells):
        return all(c.key in self._prop for c in cells)

    def lookup(self, codes):
        out = self._dense[np.asarray(codes)]
        if np.isnan(out).any():
            raise DomainError("policy does not cover every cell present in the sample")
        return out

    @classmethod
    def constant(cls, cells, value):
        return cls({c.key: value for c in cells})


@dataclass(frozen=True)
class Intervention:
    """Odds multiplier applied to the cells with ``a == select_a`` and ``R == select_r``.

    A selector left as ``None`` matches everything; at least one must be set.
    """

    select_a: Optional[int] = None
    select_r: Optional[int] = None
    odds_factor: float = 1.0

    def __post_init__(self):
        if self.select_a is None and self.select_r is None:
            raise ConfigError("at least one of select_a, select_r must be set", "intervention")
        if self.select_a is not None:
            object.__setattr__(self, "select_a", check_binary(self.select_a, "select_a"))
        if self.select_r is not None:
            object.__setattr__(self, "select_r", check_binary(self.select_r, "select_r"))
        object.__setattr__(self, "odds_factor", check_positive(self.odds_factor, "odds_factor", ConfigError))

    def matches(self, a, r):
        return (self.select_a is None or a == self.select_a) and (self.select_r is None or r == self.select_r)

    @classmethod
    def from_dict(cls, data):
        unknown = sorted(set(data) - {"select_a", "select_r", "odds_factor"})
        if unknown:
            raise ConfigError(f"unknown field(s) {unknown}", "intervention")
        return cls(**data)

    def to_dict(self):
        return {"select_a": self.select_a, "select_r": self.select_r, "odds_factor": self.odds_factor}


def baseline_policy(cells) -> DecisionPolicy:
    """The pre-deployment policy: each cell's ``pi_pre``."""
    if len(cells) == 0:
        raise ConfigError("cell table is empty", "cells")
    return DecisionPolicy({c.key: c.pi_pre for c in cells})


def intervene(base: DecisionPolicy, iv: Intervention, pred, cells) -> DecisionPolicy:
    """Odds-multiply ``base`` on every cell selected by ``iv``; other cells are copied."""
    from .predictor import partition_on

    rmap = partition_on(pred, cells)
    out = {}
    for c in cells:
        p = base(c.key)
        out[c.key] = odds_multiply(p, iv.odds_factor) if iv.matches(c.a, rmap[c.key]) else p
    return DecisionPolicy(out)


def decide(policy: DecisionPolicy, units, key: int, x2_threshold: float = 0.5):
    """Bernoulli decisions ``d ~ Bern(policy(cell))``.

    ``units`` is a :class:`~pfl.population.Sample` (returns an int8 array) or
    a single :class:`~pfl.population.Individual` (returns an int; its cell
    is located with ``x2_threshold``, a sample carries its own). ``key`` is a
    stream key from :func:`pfl.rng.stream_key`; each unit's draw depends only
    on ``key`` and its index, never on outcomes.
    """
    from .population import Individual

    if isinstance(units, Individual):
        xb = int(units.x2 >= x2_threshold)
        p = policy((units.a, units.x1, xb))
        return int(rng.uniforms(key, [units.index])[0] < p)
    p = policy.lookup(units.cell_codes)
    return (rng.uniforms(key, units.index) < p).astype(np.int8)
