"""Self-contained invariant checks behind ``pfl verify``."""
from __future__ import annotations

import dataclasses
import math
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import oracle, rng
from .experiment import load_config, run_scenario, write_csv
from .experiment.runner import resolve_predictor
from .metrics import VARIANTS, empirical_metrics, within_sampling_error
from .policy import DecisionPolicy, baseline_policy, decide, odds_multiply
from .population import PopulationSpec, build_example_population, observe, sample_individuals


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


def _strictly(seq, increasing=True):
    pairs = list(zip(seq, seq[1:]))
    return all((b > a) if increasing else (b < a) for a, b in pairs)


def check_population():
    spec = PopulationSpec()
    cells = build_example_population(spec)
    total = math.fsum(c.mass for c in cells)
    ok = abs(total - 1.0) <= 1e-12 and all(
        c.mu0 == spec.outcome_base[c.x1] and c.mu1 == odds_multiply(spec.outcome_base[c.x1], 10.0)
        for c in cells
    )
    return Check("population: masses sum to 1, outcome regressions match", ok, f"sum={total!r}")


def check_odds():
    ps = np.linspace(0.01, 0.99, 25)
    ks = [1.0, 2.0, 10.0, 1e2, 1e4]
    compose = max(abs(odds_multiply(odds_multiply(p, a), b) - odds_multiply(p, a * b))
                  for p in ps for a in ks for b in ks)
    mono = all(odds_multiply(p, ks[i]) <= odds_multiply(p, ks[i + 1]) for p in ps for i in range(len(ks) - 1))
    return Check("odds_multiply composes and is monotone", compose <= 1e-12 and mono, f"max err {compose:.2e}")


def check_sweeps(results):
    out = []
    p1, p2 = results["predictor1"], results["predictor2"]

    pre1 = p1.get(1.0, "observable", "oracle").report
    pre2 = p2.get(1.0, "observable", "oracle").report
    d1, d2 = pre1.disparities, pre2.disparities
    out.append(Check("pre-deployment predictive parity (predictor 1)",
                     d1["ppv"] <= 1e-12 and d1["npv"] <= 1e-12, f"ppv {d1['ppv']:.1e} npv {d1['npv']:.1e}"))
    out.append(Check("pre-deployment equalized odds (predictor 2)",
                     d2["fpr"] <= 1e-12 and d2["fnr"] <= 1e-12, f"fpr {d2['fpr']:.1e} fnr {d2['fnr']:.1e}"))

    for name, res in results.items():
        for path in res.paths:
            rates = {tuple(r.report.groups[a].prediction_rate for a in (0, 1))
                     for r in res.select("observable", path)}
            out.append(Check(f"{name}/{path}: prediction rates constant across k", len(rates) == 1))
            cf = {tuple(tuple(r.report.groups[a].as_dict().items()) for a in (0, 1))
                  for r in res.select("counterfactual", path)}
            out.append(Check(f"{name}/{path}: counterfactual metrics constant across k", len(cf) == 1))

    npv = p1.series("npv", "abs_diff")
    out.append(Check("predictor 1: npv disparity strictly increasing", _strictly(npv), f"final {npv[-1]:.6f}"))
    acc1 = p1.series("accuracy", 1)
    acc0 = p1.series("accuracy", 0)
    out.append(Check("predictor 1: group-1 accuracy decreasing, group-0 constant",
                     _strictly(acc1, False) and max(acc0) - min(acc0) <= 1e-9))
    for m in ("fpr", "fnr"):
        s = p2.series(m, "abs_diff")
        out.append(Check(f"predictor 2: {m} disparity strictly increasing", _strictly(s), f"final {s[-1]:.6f}"))
    out.append(Check("predictor 2: group-1 accuracy increasing", _strictly(p2.series("accuracy", 1))))

    for name, res in results.items():
        if "mc" not in res.paths:
            continue
        comps = []
        for k in res.ks:
            for v in VARIANTS:
                comps += within_sampling_error(res.get(k, v, "oracle").report, res.get(k, v, "mc").report)
        bad = sum(not c.ok for c in comps)
        out.append(Check(f"{name}: oracle vs Monte Carlo within 4 s.e.", bad <= 0.01 * len(comps),
                         f"{bad}/{len(comps)} outside"))
    return out


def check_identities(results):
    worst = 0.0
    for res in results.values():
        for rec in res.records:
            for gm in rec.report.groups.values():
                if gm.ppv is None or gm.npv is None:
                    continue
                rhs = gm.ppv * gm.prediction_rate + gm.npv * (1.0 - gm.prediction_rate)
                worst = max(worst, abs(gm.accuracy - rhs))
    return Check("accuracy = ppv * rate + npv * (1 - rate)", worst <= 1e-12, f"max err {worst:.1e}")


def check_consistency(n, seed):
    spec = PopulationSpec()
    cells = build_example_population(spec)
    sample = sample_individuals(spec, n, seed)
    pred = resolve_predictor(load_config("predictor1.json"))
    seen = observe(sample, decide(baseline_policy(cells), sample, rng.stream_key(seed, "verify")))
    a1 = bool(np.all(seen.y == (1 - seen.d) * seen.y0 + seen.d * seen.y1))
    zero = observe(sample, decide(DecisionPolicy.constant(cells, 0.0), sample, rng.stream_key(seed, "zero")))
    obs = empirical_metrics(zero, pred, "observable")
    cf = empirical_metrics(zero, pred, "counterfactual")
    ctx0 = oracle.OracleContext.build(cells, DecisionPolicy.constant(cells, 0.0), pred)
    exact = all(oracle.observable_metrics(ctx0, a) == oracle.counterfactual_metrics(ctx0, a) for a in (0, 1))
    return [
        Check("consistency: y = (1 - d) y0 + d y1 for every unit", a1),
        Check("consistency: pi = 0 makes observable == counterfactual (sample and oracle)",
              obs.groups == cf.groups and exact),
    ]


def check_determinism(n, seed):
    cfg = load_config("predictor1.json").with_overrides(mode="both", n_samples=n, seed=seed)
    cfg = dataclasses.replace(cfg, grid=cfg.grid[::7])
    with tempfile.TemporaryDirectory() as tmp:
        a = write_csv(run_scenario(cfg, n_jobs=1), Path(tmp) / "a.csv").read_bytes()
        b = write_csv(run_scenario(cfg, n_jobs=4), Path(tmp) / "b.csv").read_bytes()
    return Check("determinism: CSV byte-identical across runs and thread counts", a == b)


def run_checks(n_samples=1_000_000, seed=None, n_jobs=4):
    results = {}
    for name in ("predictor1", "predictor2"):
        cfg = load_config(f"{name}.json").with_overrides(mode="both", n_samples=n_samples, seed=seed)
        results[name] = run_scenario(cfg, n_jobs=n_jobs)
    seed = 0 if seed is None else seed
    checks = [check_population(), check_odds()]
    checks += check_sweeps(results)
    checks.append(check_identities(results))
    checks += check_consistency(min(n_samples, 200_000), seed)
    checks.append(check_determinism(min(n_samples, 100_000), seed))
    return checks
