import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exclgraph import (
    Event,
    QuantumStrategy,
    alpha,
    best_strategy,
    born_probabilities,
    build_graph,
    catalog_get,
    cycle_graph,
    evaluate_strategy,
    instrumental,
    lovasz_theta,
    pearl_family,
    quantum_value,
    seesaw_lower_bound,
    support_graph,
    theta_cycle_formula,
    tsirelson_strategy,
)
from exclgraph.classical import enumerate_strategies
from exclgraph.graph import complement, complete_graph
from exclgraph.quantum import StrategyShapeError, from_deterministic, restart_seeds


@pytest.mark.parametrize("n", [5, 7, 9, 11])
def test_theta_cycles_match_formula(n):
    assert abs(lovasz_theta(cycle_graph(n)).value - theta_cycle_formula(n)) < 1e-6


def test_theta_values():
    assert abs(theta_cycle_formula(5) - math.sqrt(5)) < 1e-12
    # 7 cos(pi/7) / (1 + cos(pi/7)), evaluated independently at 30 digits
    assert theta_cycle_formula(7) == pytest.approx(3.31766720739409, abs=1e-12)
    assert lovasz_theta(complete_graph(4)).value == pytest.approx(1, abs=1e-7)
    g = build_graph(instrumental(2, 2, 2))
    assert abs(lovasz_theta(g).value - alpha(g).value) < 1e-6
    c5 = cycle_graph(5)
    assert lovasz_theta(c5).value * lovasz_theta(complement(c5)).value == pytest.approx(5, abs=1e-6)


def test_cycle_formula_approaches_half_n_from_below():
    ratios = [theta_cycle_formula(n) / (n / 2) for n in range(5, 102, 2)]
    assert all(r < 1 for r in ratios)
    assert all(a < b for a, b in zip(ratios, ratios[1:]))


def test_labelling_reproduces_witness():
    res = lovasz_theta(cycle_graph(5))
    U = res.labelling()
    assert U @ U.T == pytest.approx(res.psd_witness, abs=1e-7)


@settings(max_examples=15, deadline=None)
@given(st.integers(5, 9), st.lists(st.floats(0.1, 3), min_size=9, max_size=9))
def test_sandwich(n, w):
    g = cycle_graph(n).with_weights(w[:n])
    assert alpha(g).value <= lovasz_theta(g).value + 1e-7
    assert lovasz_theta(g).value <= float(np.sum(w[:n])) + 1e-7


# -- strategies ---------------------------------------------------------------


def test_dimension_one_reproduces_deterministic():
    s = instrumental(3, 2, 2)
    for det in list(enumerate_strategies(s))[:10]:
        q = from_deterministic(det, s, (1, 1))
        p, ref = born_probabilities(q, s), evaluate_strategy(det, s)
        assert all(p[e] == ref[e] for e in ref.table)


def _random_projectors(rng, d, k):
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    cuts = np.sort(rng.choice(np.arange(1, d), size=k - 1, replace=False)) if k > 1 else []
    parts = np.split(np.arange(d), cuts)
    return tuple(Q[:, idx] @ Q[:, idx].T for idx in parts)


def test_product_state_factorises():
    rng = np.random.default_rng(2)
    s = instrumental(3, 2, 2)
    phi = rng.standard_normal(3); phi /= np.linalg.norm(phi)
    chi = rng.standard_normal(3); chi /= np.linalg.norm(chi)
    alice = tuple(_random_projectors(rng, 3, 2) for _ in range(3))
    bob = tuple(_random_projectors(rng, 3, 2) for _ in range(2))
    q = QuantumStrategy("instrumental", (3, 3), np.kron(phi, chi), alice, bob)
    p = born_probabilities(q, s)
    for x in range(3):
        total = 0.0
        for a in range(2):
            for b in range(2):
                pa = phi @ alice[x][a] @ phi
                pb = chi @ bob[a][b] @ chi
                assert p[Event((a, b), (x,))] == pytest.approx(pa * pb, abs=1e-12)
                total += p[Event((a, b), (x,))]
        assert total == pytest.approx(1, abs=1e-12)


def test_tsirelson_value():
    chsh = catalog_get("chsh_bell")
    v = quantum_value(chsh, tsirelson_strategy())
    assert v == pytest.approx(2 + math.sqrt(2), abs=1e-9)
    assert v <= lovasz_theta(support_graph(chsh)).value + 1e-6


def test_strategy_validation():
    good = tsirelson_strategy()
    bad = QuantumStrategy("bell", (2, 2), good.state * 2, good.alice, good.bob)
    with pytest.raises(StrategyShapeError):
        bad.check()
    with pytest.raises(StrategyShapeError):
        born_probabilities(good, instrumental(2, 2, 2))


def test_strategy_json_roundtrip():
    q = tsirelson_strategy()
    back = QuantumStrategy.from_json(q.to_json())
    assert np.array_equal(back.state, q.state)
    assert all(np.array_equal(a, b) for ca, cb in zip(q.alice, back.alice) for a, b in zip(ca, cb))


def test_restart_seeds_are_deterministic():
    assert restart_seeds(7, 5) == restart_seeds(7, 5)
    assert len(set(restart_seeds(7, 50))) == 50


# -- see-saw ------------------------------------------------------------------


def test_seesaw_bonet():
    bonet = catalog_get("bonet")
    res = seesaw_lower_bound(bonet, dims=(2, 2), restarts=50, seed=1)
    assert res.value >= (3 + math.sqrt(2)) / 2 - 1e-3
    assert res.value <= math.sqrt(5) + 1e-6
    assert quantum_value(bonet, res.strategy) == pytest.approx(res.value, abs=1e-12)


def test_seesaw_traces_are_monotone():
    res = seesaw_lower_bound(catalog_get("c7_433"), dims=(3, 3), restarts=8, seed=3)
    for r in res.restarts:
        assert all(b >= a - 1e-9 for a, b in zip(r.trace, r.trace[1:]))


def test_seesaw_never_below_classical():
    q = catalog_get("inst_chsh_422")
    res = seesaw_lower_bound(q, restarts=1, seed=0)
    assert res.value >= best_strategy(q)[0] - 1e-9


def test_seesaw_chsh_reaches_tsirelson():
    res = seesaw_lower_bound(catalog_get("chsh_bell"), restarts=20, seed=1)
    assert res.value == pytest.approx(2 + math.sqrt(2), abs=1e-6)


def test_seesaw_is_deterministic_and_thread_independent():
    q = catalog_get("bonet")
    a = seesaw_lower_bound(q, restarts=6, seed=9)
    b = seesaw_lower_bound(q, restarts=6, seed=9, workers=3)
    assert a.value == b.value
    assert [r.trace for r in a.restarts] == [r.trace for r in b.restarts]


def test_seesaw_complex_field():
    res = seesaw_lower_bound(catalog_get("chsh_bell"), restarts=5, seed=2, field_="complex")
    assert res.value <= 2 + math.sqrt(2) + 1e-6
    assert np.iscomplexobj(res.strategy.state)


@pytest.mark.parametrize("m,n", [(2, 2), (2, 3), (3, 2)])
def test_seesaw_pearl_no_violation(m, n):
    for q in pearl_family(2, m, n)[:4]:
        assert seesaw_lower_bound(q, restarts=3, seed=0).value <= 1 + 1e-6


def test_seesaw_rejects_large_dims():
    with pytest.raises(ValueError):
        seesaw_lower_bound(catalog_get("bonet"), dims=(5, 5), seed=0)
