"""Sweep execution over the odds-factor grid, oracle and Monte Carlo paths."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

from .. import rng
from ..metrics import VARIANTS, MetricReport, empirical_metrics
from ..oracle import OracleContext, oracle_report
from ..policy import baseline_policy, decide, intervene
from ..population import observe, sample_individuals
from ..predictor import fit_plugin, partition_on
from .config import FitInstruction, ScenarioConfig

log = logging.getLogger(__name__)

PATHS = ("mc", "oracle")


@dataclass(frozen=True)
class SweepRecord:
    k: float
    delta_pi: float
    variant: str
    path: str
    report: MetricReport

    @property
    def sort_key(self):
        return (self.k, self.variant, self.path)


@dataclass(frozen=True)
class SweepResult:
    records: Tuple[SweepRecord, ...]

    def __post_init__(self):
        recs = tuple(sorted(self.records, key=lambda r: r.sort_key))
        keys = [r.sort_key for r in recs]
        if len(set(keys)) != len(keys):
            raise ValueError("sweep records must be unique on (k, variant, path)")
        object.__setattr__(self, "records", recs)

    def __len__(self):
        return len(self.records)

    @property
    def ks(self):
        return sorted({r.k for r in self.records})

    @property
    def paths(self):
        return sorted({r.path for r in self.records})

    def select(self, variant=None, path=None):
        return [r for r in self.records
                if (variant is None or r.variant == variant) and (path is None or r.path == path)]

    def get(self, k, variant, path) -> Optional[SweepRecord]:
        for r in self.records:
            if r.sort_key == (k, variant, path):
                return r
        return None

    def series(self, metric, group, variant="observable", path="oracle"):
        """Values of ``metric`` for ``group`` (or ``"abs_diff"``) in k order."""
        out = []
        for r in self.select(variant, path):
            if group == "abs_diff":
                out.append(r.report.disparities[metric])
            else:
                out.append(getattr(r.report.groups[group], metric))
        return out


def resolve_predictor(cfg: ScenarioConfig):
    """The scenario's predictor, fitted on a pre-deployment draw if requested."""
    pred = cfg.predictor
    if not isinstance(pred, FitInstruction):
        return pred
    seed = cfg.fit_seed()
    train = sample_individuals(cfg.population, pred.train_size, seed)
    d = decide(baseline_policy(cfg.cells()), train, rng.stream_key(seed, "decide", "pre"))
    return fit_plugin(observe(train, d), pred.features, pred.threshold)


def propensity_change(cells, base, post, iv, rmap):
    """Mass-weighted mean of ``post - base`` over the cells ``iv`` selects."""
    sel = [c for c in cells if iv.matches(c.a, rmap[c.key])]
    mass = math.fsum(c.mass for c in sel)
    if mass == 0:
        return 0.0
    return math.fsum(c.mass * (post(c.key) - base(c.key)) for c in sel) / mass


def run_scenario(cfg: ScenarioConfig, n_jobs: int = 1, predictor=None) -> SweepResult:
    """Evaluate every grid point of ``cfg``.

    Output is a pure function of ``cfg``: the evaluation population is drawn
    once from the evaluation seed, and decisions at grid index ``i`` use the
    stream ``(eval seed, "decide", i)``, so ``n_jobs`` changes only speed.
    """
    cells = cfg.cells()
    pred = predictor if predictor is not None else resolve_predictor(cfg)
    rmap = partition_on(pred, cells)
    base = baseline_policy(cells)

    sample = r = None
    if cfg.eval.mc:
        eval_seed = cfg.eval_seed()
        sample = sample_individuals(cfg.population, cfg.eval.n_samples, eval_seed)
        r = pred.predict(sample.X)

    def point(i, k):
        iv = cfg.intervention(k)
        post = intervene(base, iv, pred, cells)
        dpi = propensity_change(cells, base, post, iv, rmap)
        out = []
        if cfg.eval.oracle:
            ctx = OracleContext(cells, post, rmap)
            out += [SweepRecord(k, dpi, v, "oracle", oracle_report(ctx, v)) for v in VARIANTS]
        if cfg.eval.mc:
            d = decide(post, sample, rng.stream_key(eval_seed, "decide", i))
            seen = observe(sample, d)
            out += [SweepRecord(k, dpi, v, "mc", empirical_metrics(seen, pred, v, r=r)) for v in VARIANTS]
        log.debug("k=%g done (%d records)", k, len(out))
        return out

    grid = list(enumerate(cfg.grid))
    if n_jobs > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            chunks = list(pool.map(lambda ik: point(*ik), grid))
    else:
        chunks = [point(i, k) for i, k in grid]
    return SweepResult(tuple(rec for chunk in chunks for rec in chunk))
