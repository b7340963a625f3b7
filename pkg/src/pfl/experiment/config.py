"""Scenario configuration and its JSON form.

A scenario file looks like::

    {
      "name": "predictor1",
      "seed": 7,                                   # optional master seed
      "population": {"p_a": 0.5, ...},             # PopulationSpec fields,
                                                   # or {"cells": [...]} / {"cells_csv": "t.csv"}
      "predictor": {"fit": {"features": ["x1"], "threshold": 0.5,
                            "train_size": 10000, "seed": null}},
                                                   # or {"kind": "x2_threshold", "threshold": 0.5}
      "intervention": {"select_a": 1, "select_r": 0,
                       "grid": {"start": 1, "stop": 10000, "num": 50}},
                                                   # or "odds_factors": [...] / "odds_factor": 100.0
      "eval": {"n_samples": 1000000, "seed": null, "mode": "oracle"}
    }

Master seed precedence, highest first: explicit argument (CLI ``--seed``),
the file's ``seed``, the ``PFL_SEED`` environment variable, ``DEFAULT_SEED``.
Fit and evaluation seeds not given explicitly are derived from the master.
"""
from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from .. import rng
from ..exceptions import ConfigError
from ..policy import Intervention
from ..population import CellTable, PopulationSpec, build_example_population
from ..predictor import PluginPredictor, ThresholdPredictor, predictor_from_dict

MODES = ("oracle", "mc", "both")
DEFAULT_SEED = 20220101
DEFAULT_GRID = {"start": 1.0, "stop": 1e4, "num": 50}
BUNDLED = ("predictor1", "predictor2", "predictor1_n10k", "predictor2_n10k")


def log_grid(start=1.0, stop=1e4, num=50):
    """``num`` log-spaced odds factors on ``[start, stop]``, endpoints exact."""
    if num < 0 or start < 1 or stop < start:
        raise ConfigError(f"bad grid start={start} stop={stop} num={num}", "intervention.grid")
    if num == 0:
        return ()
    if num == 1:
        return (float(start),)
    ks = np.logspace(np.log10(start), np.log10(stop), int(num))
    ks[0], ks[-1] = start, stop
    return tuple(float(k) for k in ks)


@dataclass(frozen=True)
class FitInstruction:
    features: Tuple[str, ...] = ("x1",)
    threshold: float = 0.5
    train_size: int = 10_000
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        if _not_int(self.train_size) or self.train_size < 1:
            raise ConfigError(f"must be an integer >= 1, got {self.train_size!r}", "predictor.fit.train_size")
        if self.seed is not None and _not_int(self.seed):
            raise ConfigError(f"must be an integer, got {self.seed!r}", "predictor.fit.seed")


@dataclass(frozen=True)
class EvalConfig:
    n_samples: int = 1_000_000
    seed: Optional[int] = None
    mode: str = "oracle"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}", "eval.mode")
        if _not_int(self.n_samples):
            raise ConfigError(f"must be an integer, got {self.n_samples!r}", "eval.n_samples")
        if self.mode != "oracle" and self.n_samples < 1:
            raise ConfigError(f"must be >= 1 for mode {self.mode!r}, got {self.n_samples}", "eval.n_samples")
        if self.seed is not None and _not_int(self.seed):
            raise ConfigError(f"must be an integer, got {self.seed!r}", "eval.seed")

    @property
    def oracle(self):
        return self.mode in ("oracle", "both")

    @property
    def mc(self):
        return self.mode in ("mc", "both")


def _not_int(v):
    return isinstance(v, bool) or not isinstance(v, (int, np.integer))


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    population: Union[PopulationSpec, CellTable] = PopulationSpec()
    predictor: Union[FitInstruction, PluginPredictor, ThresholdPredictor] = FitInstruction()
    select_a: Optional[int] = 1
    select_r: Optional[int] = 0
    grid: Tuple[float, ...] = field(default_factory=lambda: log_grid(**DEFAULT_GRID))
    eval: EvalConfig = EvalConfig()
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(k) for k in self.grid))
        if any(k < 1 for k in self.grid):
            raise ConfigError("odds factors must be >= 1", "intervention.grid")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError("odds factors must be strictly ascending", "intervention.grid")
        # validates the selectors
        self.intervention(1.0)
        if self.seed is not None and _not_int(self.seed):
            raise ConfigError(f"must be an integer, got {self.seed!r}", "seed")

    def intervention(self, k) -> Intervention:
        return Intervention(self.select_a, self.select_r, k)

    def cells(self) -> CellTable:
        if isinstance(self.population, CellTable):
            return self.population
        return build_example_population(self.population)

    def master_seed(self):
        if self.seed is not None:
            return int(self.seed)
        env = os.environ.get("PFL_SEED")
        if env not in (None, ""):
            try:
                return int(env)
            except ValueError:
                raise ConfigError(f"PFL_SEED must be an integer, got {env!r}", "PFL_SEED") from None
        return DEFAULT_SEED

    def fit_seed(self):
        fit = self.predictor
        if isinstance(fit, FitInstruction) and fit.seed is not None:
            return int(fit.seed)
        return rng.stream_key(self.master_seed(), "fit")

    def eval_seed(self):
        if self.eval.seed is not None:
            return int(self.eval.seed)
        return rng.stream_key(self.master_seed(), "eval")

    def with_overrides(self, mode=None, seed=None, n_samples=None):
        """Copy with CLI overrides applied; ``seed`` also drops explicit sub-seeds."""
        ev = self.eval
        cfg = self
        if seed is not None:
            pred = self.predictor
            if isinstance(pred, FitInstruction):
                pred = dataclasses.replace(pred, seed=None)
            ev = dataclasses.replace(ev, seed=None)
            cfg = dataclasses.replace(cfg, seed=seed, predictor=pred)
        if mode is not None or n_samples is not None:
            ev = EvalConfig(
                n_samples=ev.n_samples if n_samples is None else n_samples,
                seed=ev.seed,
                mode=ev.mode if mode is None else mode,
            )
        return dataclasses.replace(cfg, eval=ev)

    def to_dict(self):
        if isinstance(self.population, CellTable):
            pop = {"cells": self.population.to_records(), "x2_threshold": self.population.x2_threshold}
        else:
            pop = self.population.to_dict()
        if isinstance(self.predictor, FitInstruction):
            pred = {"fit": dataclasses.asdict(self.predictor)}
            pred["fit"]["features"] = list(self.predictor.features)
        else:
            pred = self.predictor.to_dict()
        return {
            "name": self.name,
            "seed": self.seed,
            "population": pop,
            "predictor": pred,
            "intervention": {"select_a": self.select_a, "select_r": self.select_r, "odds_factors": list(self.grid)},
            "eval": dataclasses.asdict(self.eval),
        }


def _section(data, key, allowed):
    sec = data.get(key, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"expected an object, got {type(sec).__name__}", key)
    unknown = sorted(set(sec) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown field(s) {unknown}", key)
    return sec


def config_from_dict(data, base_dir=None) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("scenario config must be a JSON object")
    unknown = sorted(set(data) - {"name", "seed", "population", "predictor", "intervention", "eval"})
    if unknown:
        raise ConfigError(f"unknown field(s) {unknown}", "config")

    pop = data.get("population", {})
    if not isinstance(pop, dict):
        raise ConfigError("expected an object", "population")
    if "cells" in pop or "cells_csv" in pop:
        thr = pop.get("x2_threshold", 0.5)
        if "cells_csv" in pop:
            csv_path = Path(pop["cells_csv"])
            if base_dir is not None and not csv_path.is_absolute():
                csv_path = Path(base_dir) / csv_path
            try:
                population = CellTable.from_csv(csv_path, thr)
            except OSError as exc:
                raise ConfigError(f"cannot read {csv_path}: {exc}", "population.cells_csv") from None
        else:
            population = CellTable.from_records(pop["cells"], thr)
    else:
        population = PopulationSpec.from_dict(pop)

    pred = data.get("predictor", {"fit": {}})
    if not isinstance(pred, dict):
        raise ConfigError("expected an object", "predictor")
    if "fit" in pred:
        fit = _section(pred, "fit", [f.name for f in dataclasses.fields(FitInstruction)])
        predictor = FitInstruction(**fit)
    else:
        predictor = predictor_from_dict(pred)

    iv = _section(data, "intervention", ["select_a", "select_r", "odds_factor", "odds_factors", "grid"])
    given = [k for k in ("odds_factor", "odds_factors", "grid") if k in iv]
    if len(given) > 1:
        raise ConfigError(f"give only one of {given}", "intervention")
    if "odds_factor" in iv:
        grid = (iv["odds_factor"],)
    elif "odds_factors" in iv:
        grid = tuple(iv["odds_factors"])
    else:
        g = dict(DEFAULT_GRID, **iv.get("grid", {}))
        unknown = sorted(set(g) - set(DEFAULT_GRID))
        if unknown:
            raise ConfigError(f"unknown field(s) {unknown}", "intervention.grid")
        grid = log_grid(**g)
    for k in grid:
        if isinstance(k, bool) or not isinstance(k, (int, float)):
            raise ConfigError(f"odds factor must be a number, got {k!r}", "intervention")

    ev = _section(data, "eval", ["n_samples", "seed", "mode"])
    try:
        return ScenarioConfig(
            name=str(data.get("name", "scenario")),
            population=population,
            predictor=predictor,
            select_a=iv.get("select_a"),
            select_r=iv.get("select_r"),
            grid=grid,
            eval=EvalConfig(**ev),
            seed=data.get("seed"),
        )
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ScenarioConfig:
    """Load a scenario from ``path``, or a bundled one by name (``predictor1.json``)."""
    p = Path(path)
    if p.is_file():
        text, base = p.read_text(), p.parent
    else:
        stem = p.name[:-5] if p.name.endswith(".json") else p.name
        if p.parent != Path(".") or stem not in BUNDLED:
            raise ConfigError(f"no such config file {str(path)!r} and no bundled config of that name", "config")
        text = resources.files("pfl.configs").joinpath(f"{stem}.json").read_text()
        base = None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})", "config") from None
    return config_from_dict(data, base)
