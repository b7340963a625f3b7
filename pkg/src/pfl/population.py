"""Data-generating process: covariates, potential outcomes and the observation rule.

Two views of the same population are offered. :class:`CellTable` is the exact,
finite one: the joint law of ``(a, x1, x2bin)`` with the outcome regressions
and the baseline treatment propensity in each cell. :func:`sample_individuals`
is the Monte Carlo one, drawing units with both potential outcomes attached.
Neither takes a time index, so the law of ``(A, X, Y0, Y1)`` cannot differ
between training and deployment.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass
from functools import singledispatch
from pathlib import Path
from typing import Iterator, Optional, Union

import numpy as np
from scipy.special import ndtr, ndtri

from . import rng
from ._validation import check_binary, check_pair, check_positive, check_probability
from .exceptions import ConfigError, EmptySampleError
from .policy import odds_multiply

CELL_COLUMNS = ("a", "x1", "x2bin", "mass", "mu0", "mu1", "pi_pre")
MASS_TOL = 1e-12


def normal_cdf(x):
    """Standard normal CDF, ``0.5 * (1 + erf(x / sqrt(2)))``."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def cell_code(a, x1, x2bin):
    """Dense index ``4a + 2x1 + x2bin`` in ``range(8)``; works on arrays."""
    return 4 * a + 2 * x1 + x2bin


@dataclass(frozen=True)
class Cell:
    a: int
    x1: int
    x2bin: int
    mass: float
    mu0: float
    mu1: float
    pi_pre: float

    def __post_init__(self):
        for name in ("a", "x1", "x2bin"):
            object.__setattr__(self, name, check_binary(getattr(self, name), name))
        for name in ("mass", "mu0", "mu1", "pi_pre"):
            object.__setattr__(self, name, check_probability(getattr(self, name), name))

    @property
    def key(self):
        return (self.a, self.x1, self.x2bin)

    @property
    def code(self):
        return cell_code(self.a, self.x1, self.x2bin)


@dataclass(frozen=True)
class CellTable:
    """Finite joint distribution over deconfounding cells.

    ``x2_threshold`` records where the continuous covariate was cut to form
    ``x2bin``; predictors on ``x2`` are only measurable on this grid when
    they cut at the same point.
    """

    cells: tuple
    x2_threshold: float = 0.5

    def __post_init__(self):
        cells = tuple(self.cells)
        if not cells:
            raise ConfigError("cell table is empty", "cells")
        seen = set()
        for c in cells:
            if not isinstance(c, Cell):
                raise ConfigError(f"expected Cell, got {type(c).__name__}", "cells")
            if c.key in seen:
                raise ConfigError(f"duplicate cell {c.key}", "cells")
            seen.add(c.key)
        total = math.fsum(c.mass for c in cells)
        if abs(total - 1.0) > MASS_TOL:
            raise ConfigError(f"masses sum to {total!r}, not 1", "mass")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "x2_threshold", float(self.x2_threshold))
        object.__setattr__(self, "_index", {c.key: c for c in cells})

    def __iter__(self) -> Iterator[Cell]:
        return iter(self.cells)

    def __len__(self):
        return len(self.cells)

    def __getitem__(self, key) -> Cell:
        return self._index[tuple(key)]

    def __contains__(self, key):
        return tuple(key) in self._index

    def keys(self):
        return [c.key for c in self.cells]

    @classmethod
    def from_records(cls, records, x2_threshold=0.5):
        cells = []
        for i, rec in enumerate(records):
            missing = [c for c in CELL_COLUMNS if c not in rec]
            if missing:
                raise ConfigError(f"row {i} lacks {missing}", "cells")
            try:
                cells.append(Cell(**{c: _number(rec[c], c) for c in CELL_COLUMNS}))
            except ConfigError as exc:
                raise ConfigError(f"row {i}: {exc}", exc.field) from None
        return cls(tuple(cells), x2_threshold)

    def to_records(self):
        return [dataclasses.asdict(c) for c in self.cells]

    @classmethod
    def from_csv(cls, path, x2_threshold=0.5):
        """Load a table from CSV with header ``a,x1,x2bin,mass,mu0,mu1,pi_pre``."""
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or tuple(reader.fieldnames) != CELL_COLUMNS:
                raise ConfigError(
                    f"{path}: header must be {','.join(CELL_COLUMNS)}, got {reader.fieldnames}",
                    "cells",
                )
            return cls.from_records(list(reader), x2_threshold)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CELL_COLUMNS)
            for c in self.cells:
                writer.writerow([c.a, c.x1, c.x2bin] + [repr(getattr(c, n)) for n in CELL_COLUMNS[3:]])

    def lookup(self, name, codes):
        """Vectorised per-cell attribute lookup by :func:`cell_code`.

        Codes of cells absent from the table map to NaN.
        """
        table = np.full(8, np.nan)
        for c in self.cells:
            table[c.code] = getattr(c, name)
        return table[np.asarray(codes)]


def _number(value, name):
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"not a number: {value!r}", name) from None
    if name in ("a", "x1", "x2bin") and isinstance(value, float) and value.is_integer():
        value = int(value)
    return value


@dataclass(frozen=True)
class PopulationSpec:
    """Parameters of the loan example; defaults reproduce it exactly.

    ``p_x1_given_a`` is indexed by group, ``outcome_base`` and ``pi_pre_base``
    by ``x1``. Potential outcomes are ``Y0 ~ Bern(outcome_base[x1])`` and
    ``Y1 ~ Bern(odds_multiply(outcome_base[x1], treatment_odds_factor))``.
    """

    p_a: float = 0.5
    p_x1_given_a: tuple = (0.8, 0.6)
    x2_threshold: float = 0.5
    outcome_base: tuple = (0.3, 0.8)
    treatment_odds_factor: float = 10.0
    pi_pre_base: tuple = (0.3, 0.8)

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)
        set_("p_a", check_probability(self.p_a, "p_a"))
        for name in ("p_x1_given_a", "outcome_base", "pi_pre_base"):
            set_(name, check_pair(getattr(self, name), name))
        thr = self.x2_threshold
        if isinstance(thr, bool) or not isinstance(thr, (int, float)) or not math.isfinite(thr):
            raise ConfigError(f"expected a finite real, got {thr!r}", "x2_threshold")
        set_("x2_threshold", float(thr))
        try:
            set_("treatment_odds_factor", check_positive(self.treatment_odds_factor, "treatment_odds_factor"))
        except ConfigError as exc:
            raise ConfigError(str(exc), "treatment_odds_factor") from None

    def mu0(self, x1):
        return self.outcome_base[x1]

    def mu1(self, x1):
        return odds_multiply(self.outcome_base[x1], self.treatment_odds_factor)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown field(s) {unknown}", "population")
        return cls(**data)

    def to_dict(self):
        d = dataclasses.asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_json(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def build_example_population(spec: PopulationSpec = PopulationSpec()) -> CellTable:
    """Enumerate the 8 cells of the ``(a, x1, x2bin)`` grid for ``spec``."""
    if not isinstance(spec, PopulationSpec):
        raise ConfigError(f"expected PopulationSpec, got {type(spec).__name__}", "population")
    p_hi = 1.0 - normal_cdf(spec.x2_threshold)
    cells = []
    for a in (0, 1):
        pa = spec.p_a if a else 1.0 - spec.p_a
        for x1 in (0, 1):
            px1 = spec.p_x1_given_a[a] if x1 else 1.0 - spec.p_x1_given_a[a]
            for x2bin in (0, 1):
                px2 = p_hi if x2bin else 1.0 - p_hi
                cells.append(
                    Cell(a, x1, x2bin, pa * px1 * px2, spec.mu0(x1), spec.mu1(x1), spec.pi_pre_base[x1])
                )
    # renormalise only if rounding pushed the sum past the tolerance
    total = math.fsum(c.mass for c in cells)
    if abs(total - 1.0) > MASS_TOL:
        cells = [dataclasses.replace(c, mass=c.mass / total) for c in cells]
    return CellTable(tuple(cells), spec.x2_threshold)


@dataclass(frozen=True)
class Individual:
    index: int
    a: int
    x1: int
    x2: float
    y0: int
    y1: int
    d: Optional[int] = None
    y: Optional[int] = None


@dataclass(frozen=True, eq=False)
class Sample:
    """Column-oriented batch of individuals.

    ``index`` holds each unit's global position in its stream, so slices of a
    larger draw keep their identity. ``d`` and ``y`` are ``None`` until
    :func:`observe` is applied.
    """

    index: np.ndarray
    a: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    y0: np.ndarray
    y1: np.ndarray
    x2_threshold: float = 0.5
    d: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.index)

    def __getitem__(self, i) -> Individual:
        opt = lambda arr: None if arr is None else int(arr[i])
        return Individual(
            int(self.index[i]), int(self.a[i]), int(self.x1[i]), float(self.x2[i]),
            int(self.y0[i]), int(self.y1[i]), opt(self.d), opt(self.y),
        )

    @property
    def x2bin(self):
        return (self.x2 >= self.x2_threshold).astype(np.int8)

    @property
    def cell_codes(self):
        return cell_code(self.a.astype(np.int64), self.x1.astype(np.int64), self.x2bin.astype(np.int64))

    @property
    def X(self):
        """Feature matrix with columns ``(a, x1, x2)``."""
        return np.column_stack([self.a, self.x1, self.x2]).astype(np.float64)

    @property
    def observed(self):
        return self.d is not None

    def slice(self, start, stop):
        take = lambda arr: None if arr is None else arr[start:stop]
        return Sample(
            self.index[start:stop], self.a[start:stop], self.x1[start:stop], self.x2[start:stop],
            self.y0[start:stop], self.y1[start:stop], self.x2_threshold, take(self.d), take(self.y),
        )


def sample_individuals(
    population: Union[PopulationSpec, CellTable], n: int, seed: int, start: int = 0
) -> Sample:
    """Draw units ``start .. start + n - 1`` of the stream for ``(population, seed)``.

    With a :class:`PopulationSpec` the draws follow the generative story
    directly (``a``, then ``x1 | a``, then ``x2 ~ N(0, 1)``). With a raw
    :class:`CellTable` a cell is drawn by mass and ``x2`` from the standard
    normal restricted to that cell's side of the threshold. Either way each
    unit depends only on ``(seed, index)``.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise EmptySampleError(f"sample size must be >= 1, got {n!r}")
    n = int(n)
    idx = np.arange(start, start + n, dtype=np.uint64)
    draw = lambda stream: rng.uniforms(rng.stream_key(seed, "population", stream), idx)

    if isinstance(population, PopulationSpec):
        spec = population
        a = (draw("a") < spec.p_a).astype(np.int8)
        x1 = (draw("x1") < np.where(a == 1, spec.p_x1_given_a[1], spec.p_x1_given_a[0])).astype(np.int8)
        x2 = ndtri(draw("x2"))
        mu0 = np.where(x1 == 1, spec.mu0(1), spec.mu0(0))
        mu1 = np.where(x1 == 1, spec.mu1(1), spec.mu1(0))
        threshold = spec.x2_threshold
    elif isinstance(population, CellTable):
        table = population
        threshold = table.x2_threshold
        cum = np.cumsum([c.mass for c in table.cells])
        pick = np.minimum(np.searchsorted(cum, draw("cell") * cum[-1], side="right"), len(table) - 1)
        keys = np.array([c.key for c in table.cells], dtype=np.int8)[pick]
        a, x1, xb = keys[:, 0], keys[:, 1], keys[:, 2]
        lo = float(ndtr(threshold))
        u = draw("x2")
        x2 = ndtri(np.where(xb == 1, lo + u * (1.0 - lo), u * lo))
        # ndtri can round onto the wrong side of the cut at extreme u
        x2 = np.where(xb == 1, np.maximum(x2, threshold), np.minimum(x2, np.nextafter(threshold, -np.inf)))
        mu0 = np.array([c.mu0 for c in table.cells])[pick]
        mu1 = np.array([c.mu1 for c in table.cells])[pick]
    else:
        raise ConfigError(f"expected PopulationSpec or CellTable, got {type(population).__name__}", "population")

    y0 = (draw("y0") < mu0).astype(np.int8)
    y1 = (draw("y1") < mu1).astype(np.int8)
    return Sample(idx.astype(np.int64), a, x1, x2, y0, y1, threshold)


@singledispatch
def observe(ind, d):
    """Attach decision ``d`` and the observed outcome ``y = (1 - d) y0 + d y1``."""
    raise TypeError(f"cannot observe {type(ind).__name__}")


@observe.register
def _(ind: Individual, d) -> Individual:
    d = check_binary(d, "d")
    return dataclasses.replace(ind, d=d, y=ind.y1 if d else ind.y0)


@observe.register
def _(ind: Sample, d) -> Sample:
    d = np.asarray(d, dtype=np.int8)
    if d.shape != ind.index.shape:
        raise ConfigError(f"decision vector has shape {d.shape}, sample has {ind.index.shape}", "d")
    if not np.all((d == 0) | (d == 1)):
        raise ConfigError("decisions must be 0 or 1", "d")
    y = np.where(d == 1, ind.y1, ind.y0).astype(np.int8)
    return dataclasses.replace(ind, d=d, y=y)
