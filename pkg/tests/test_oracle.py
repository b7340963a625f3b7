import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

import enumeration as en
from pfl import (
    Cell,
    CellTable,
    DecisionPolicy,
    DomainError,
    Intervention,
    intervene,
    partition_on,
)
from pfl.metrics import METRICS
from pfl.oracle import (
    OracleContext,
    accuracy,
    conditional_outcome,
    counterfactual_metrics,
    error_rates,
    gamma,
    observable_metrics,
    prediction_rate,
    predictive_values,
)

KS = [1.0, 1.5, 10.0, 316.0, 1e4]


def ctx_for(cells, base, pred, sel_r=None, k=1.0):
    policy = base if sel_r is None else intervene(base, Intervention(1, sel_r, k), pred, cells)
    return OracleContext.build(cells, policy, pred)


@pytest.fixture
def pre1(cells, base, pred1):
    return ctx_for(cells, base, pred1)


@pytest.fixture
def pre2(cells, base, pred2):
    return ctx_for(cells, base, pred2)


def close(a, b, tol=1e-12):
    if a is None or b is None:
        return a is None and b is None
    return abs(a - float(b)) <= tol


def test_gamma_extremes(cells, pred1):
    for value, field in ((0.0, "mu0"), (1.0, "mu1")):
        ctx = OracleContext.build(cells, DecisionPolicy.constant(cells, value), pred1)
        for c in cells:
            assert gamma(ctx, c) == getattr(c, field)


def test_gamma_pre_low_income(pre1):
    assert close(gamma(pre1, (0, 0, 1)), en.outcome_given(en.baseline, 0, 0, 1))
    assert gamma(pre1, (0, 0, 1)) == pytest.approx(0.4532432, abs=1e-7)


def test_conditional_outcome_pre_high_income(pre1):
    assert close(conditional_outcome(pre1, 1, 1, 0), en.outcome_given(en.baseline, 1, 1, 0))
    assert conditional_outcome(pre1, 1, 1, 0) == pytest.approx(0.9404878, abs=1e-7)


def test_conditional_outcome_post(cells, base, pred1):
    ctx = ctx_for(cells, base, pred1, sel_r=0, k=1e4)
    expected = en.outcome_given(en.boosted(1, 0, en.r_x1, 10_000), 1, 0, 0)
    assert close(conditional_outcome(ctx, 1, 0, 0), expected)
    assert conditional_outcome(ctx, 1, 0, 0) == pytest.approx(0.8106916, abs=1e-7)


def test_conditional_outcome_invariant_without_effect(pred1):
    cells = CellTable(tuple(Cell(a, x1, 0, 0.25, 0.3 + 0.2 * x1, 0.3 + 0.2 * x1, 0.5)
                            for a in (0, 1) for x1 in (0, 1)))
    ctxs = [OracleContext.build(cells, DecisionPolicy.constant(cells, p), pred1) for p in (0.0, 0.4, 1.0)]
    for a in (0, 1):
        for x1 in (0, 1):
            vals = {conditional_outcome(c, a, x1, 0) for c in ctxs}
            assert len(vals) == 1


def test_conditional_outcome_zero_mass(pred1):
    cells = CellTable((Cell(0, 0, 0, 1.0, 0.3, 0.5, 0.5), Cell(0, 1, 0, 0.0, 0.3, 0.5, 0.5),
                       Cell(1, 0, 0, 0.0, 0.3, 0.5, 0.5), Cell(1, 1, 0, 0.0, 0.3, 0.5, 0.5)))
    ctx = OracleContext.build(cells, DecisionPolicy.constant(cells, 0.5), pred1)
    with pytest.raises(DomainError):
        conditional_outcome(ctx, 0, 1, 0)
    with pytest.raises(DomainError):
        prediction_rate(ctx, 1)


def test_prediction_rates(pre1, pre2, cells, base, pred1, pred2):
    assert prediction_rate(pre1, 0) == pytest.approx(0.8, abs=1e-15)
    assert prediction_rate(pre1, 1) == pytest.approx(0.6, abs=1e-15)
    for a in (0, 1):
        assert close(prediction_rate(pre2, a), 1 - en.phi(0.5))
    for k in KS + [math.inf]:
        for pred, ctx0, sel in ((pred1, pre1, 0), (pred2, pre2, 1)):
            post = ctx_for(cells, base, pred, sel, k)
            assert prediction_rate(post, 1) == prediction_rate(ctx0, 1)


def test_predictive_values_pre(pre1):
    for a in (0, 1):
        ppv, npv = predictive_values(pre1, a)
        assert ppv == pytest.approx(0.9404878, abs=1e-7)
        assert npv == pytest.approx(0.5467568, abs=1e-7)


def test_predictive_values_saturation(cells, base, pred1):
    ctx = ctx_for(cells, base, pred1, 0, math.inf)
    npv1 = predictive_values(ctx, 1)[1]
    npv0 = predictive_values(ctx, 0)[1]
    assert npv1 == pytest.approx(1 - 0.8108108, abs=1e-7)
    assert abs(npv0 - npv1) == pytest.approx(0.3575676, abs=1e-7)


def test_identity_intervention_bitwise(cells, base, pred1, pre1):
    post = ctx_for(cells, base, pred1, 0, 1.0)
    for a in (0, 1):
        assert predictive_values(post, a) == predictive_values(pre1, a)
        assert error_rates(post, a) == error_rates(pre1, a)


def test_error_rates(pre2, cells, base, pred2):
    for a in (0, 1):
        fpr, fnr = error_rates(pre2, a)
        assert fpr == pytest.approx(0.3085375, abs=1e-7)
        assert fnr == pytest.approx(0.6914625, abs=1e-7)
    sat = ctx_for(cells, base, pred2, 1, math.inf)
    fpr, fnr = error_rates(sat, 1)
    assert fpr == pytest.approx(0.1367, abs=1e-4)
    assert fnr == pytest.approx(0.6475, abs=1e-4)
    assert error_rates(sat, 0) == error_rates(pre2, 0)


def test_error_rates_no_positives(pred2):
    cells = CellTable(tuple(Cell(a, 0, xb, 0.25, 0.0, 0.0, 0.5) for a in (0, 1) for xb in (0, 1)))
    ctx = OracleContext.build(cells, DecisionPolicy.constant(cells, 0.3), pred2)
    fpr, fnr = error_rates(ctx, 0)
    assert fpr == prediction_rate(ctx, 0) and fnr is None


def test_accuracy(pre1):
    assert accuracy(pre1, 0) == pytest.approx(0.8617416, abs=1e-7)
    assert accuracy(pre1, 1) == pytest.approx(0.7829954, abs=1e-7)
    cells = CellTable(tuple(Cell(a, 1, 0, 0.5, 1.0, 1.0, 0.2) for a in (0, 1)))
    from pfl import PluginPredictor
    ones = PluginPredictor.from_table(["x1"], {(0,): 1, (1,): 1})
    assert accuracy(OracleContext.build(cells, DecisionPolicy.constant(cells, 0.2), ones), 0) == 1.0


def test_counterfactual_values(cells, base, pred1, pred2):
    for k in KS:
        for a in (0, 1):
            cf1 = counterfactual_metrics(ctx_for(cells, base, pred1, 0, k), a)
            assert cf1.ppv == pytest.approx(0.8, abs=1e-15) and cf1.npv == pytest.approx(0.7, abs=1e-15)
            cf2 = counterfactual_metrics(ctx_for(cells, base, pred2, 1, k), a)
            assert close(cf2.fpr, 1 - en.phi(0.5))


@pytest.mark.parametrize("k", KS + [math.inf])
@pytest.mark.parametrize("scenario", ["p1", "p2"])
def test_all_metrics_match_enumeration(cells, base, pred1, pred2, scenario, k):
    pred, sel, r = (pred1, 0, en.r_x1) if scenario == "p1" else (pred2, 1, en.r_x2)
    ctx = ctx_for(cells, base, pred, sel, k)
    kk = mpmath.inf if math.isinf(k) else k
    pi = en.boosted(1, sel, r, kk) if k != 1 else en.baseline
    for a in (0, 1):
        obs = observable_metrics(ctx, a).as_dict()
        cf = counterfactual_metrics(ctx, a).as_dict()
        ref_obs = en.group_metrics(pi, r, a)
        ref_cf = en.group_metrics(pi, r, a, counterfactual=True)
        for m in METRICS:
            assert close(obs[m], ref_obs[m]), (a, m)
            assert close(cf[m], ref_cf[m]), (a, m)


def test_monotone_sweeps(cells, base, pred1, pred2):
    ks = [10 ** (i / 10) for i in range(41)]
    npv = [predictive_values(ctx_for(cells, base, pred1, 0, k), 1)[1] for k in ks]
    assert all(b < a for a, b in zip(npv, npv[1:]))
    rates = [error_rates(ctx_for(cells, base, pred2, 1, k), 1) for k in ks]
    for j in (0, 1):
        series = [r[j] for r in rates]
        assert all(b < a for a, b in zip(series, series[1:]))


# random finite populations


@st.composite
def tables(draw):
    keys = [(a, x1, xb) for a in (0, 1) for x1 in (0, 1) for xb in (0, 1)]
    weights = [draw(st.integers(1, 1000)) for _ in keys]
    total = sum(weights)
    cells = []
    for key, w in zip(keys, weights):
        mu0 = draw(st.floats(0.01, 0.99))
        mu1 = draw(st.floats(0.01, 0.99))
        cells.append(Cell(*key, w / total, mu0, mu1, draw(st.floats(0, 1))))
    # fix rounding so the masses sum to one within tolerance
    drift = 1.0 - math.fsum(c.mass for c in cells)
    cells[0] = Cell(*cells[0].key, cells[0].mass + drift, cells[0].mu0, cells[0].mu1, cells[0].pi_pre)
    return CellTable(tuple(cells))


@st.composite
def contexts(draw):
    from pfl import PluginPredictor, ThresholdPredictor

    cells = draw(tables())
    kind = draw(st.sampled_from(["threshold", "table"]))
    if kind == "threshold":
        pred = ThresholdPredictor(0.5)
    else:
        r = {(a, x1): draw(st.integers(0, 1)) for a in (0, 1) for x1 in (0, 1)}
        pred = PluginPredictor.from_table(["a", "x1"], r)
    policy = DecisionPolicy({c.key: draw(st.floats(0, 1)) for c in cells})
    return OracleContext.build(cells, policy, pred), pred


@settings(max_examples=40, deadline=None)
@given(contexts())
def test_random_tables_match_enumeration(ctx_pred):
    ctx, _ = ctx_pred
    rows = [(c.a, c.x1, c.x2bin, c.mass, c.mu0, c.mu1) for c in ctx.cells]
    pi = dict(ctx.policy.propensity)
    for a in (0, 1):
        obs = observable_metrics(ctx, a).as_dict()
        cf = counterfactual_metrics(ctx, a).as_dict()
        ref = en.table_metrics(rows, pi, ctx.rmap, a)
        ref_cf = en.table_metrics(rows, pi, ctx.rmap, a, counterfactual=True)
        for m in METRICS:
            assert close(obs[m], ref[m], 1e-9), m
            assert close(cf[m], ref_cf[m], 1e-9), m


@settings(max_examples=40, deadline=None)
@given(contexts(), st.data())
def test_policy_invariance(ctx_pred, data):
    ctx, pred = ctx_pred
    other = DecisionPolicy({c.key: data.draw(st.floats(0, 1)) for c in ctx.cells})
    ctx2 = OracleContext(ctx.cells, other, ctx.rmap)
    for a in (0, 1):
        assert prediction_rate(ctx, a) == prediction_rate(ctx2, a)
        assert counterfactual_metrics(ctx, a) == counterfactual_metrics(ctx2, a)


@settings(max_examples=40, deadline=None)
@given(contexts())
def test_consistency_reduction(ctx_pred):
    ctx, _ = ctx_pred
    zero = OracleContext(ctx.cells, DecisionPolicy.constant(ctx.cells, 0.0), ctx.rmap)
    for a in (0, 1):
        assert observable_metrics(zero, a) == counterfactual_metrics(zero, a)


@settings(max_examples=40, deadline=None)
@given(contexts())
def test_total_probability(ctx_pred):
    ctx, _ = ctx_pred
    for a in (0, 1):
        ppv, npv = predictive_values(ctx, a)
        rate = prediction_rate(ctx, a)
        acc = accuracy(ctx, a)
        rhs = (ppv or 0.0) * rate + (npv or 0.0) * (1 - rate)
        assert abs(acc - rhs) <= 1e-12


def test_context_requires_total_policy(cells, pred1):
    with pytest.raises(DomainError):
        OracleContext(cells, DecisionPolicy({(0, 0, 0): 0.1}), partition_on(pred1, cells))
