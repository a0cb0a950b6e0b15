import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exclgraph import (
    Event,
    LinearInequality,
    StrategyCapExceeded,
    alpha,
    bell,
    best_strategy,
    build_graph,
    catalog_get,
    classical_max_oracle,
    cycle_graph,
    enumerate_events,
    enumerate_strategies,
    evaluate,
    evaluate_strategy,
    instrumental,
    is_stable,
    pearl_family,
    strategy_count,
    support_graph,
)
from exclgraph.graph import ExclusivityGraph, complete_graph


def brute_alpha(g: ExclusivityGraph) -> float:
    """Exhaustive enumeration of every stable set, no pruning."""
    adj = g.adjacency

    def walk(i: int, chosen: list[int]) -> float:
        if i == g.n:
            return float(g.weights[chosen].sum())
        best = walk(i + 1, chosen)
        if not any(adj[i, j] for j in chosen):
            best = max(best, walk(i + 1, chosen + [i]))
        return best

    return walk(0, [])


@pytest.mark.parametrize("n,value", [(5, 2), (7, 3)])
def test_alpha_cycles(n, value):
    res = alpha(cycle_graph(n))
    assert res.value == value
    assert is_stable(cycle_graph(n), res.vertices)


def test_alpha_chsh_and_single_vertex():
    assert alpha(support_graph(catalog_get("chsh_bell"))).value == 3
    g = ExclusivityGraph(np.zeros((1, 1), bool), [2.5])
    assert alpha(g).value == 2.5
    assert alpha(ExclusivityGraph(np.zeros((0, 0), bool), [])).value == 0
    assert alpha(complete_graph(6)).value == 1


graphs = st.integers(1, 14).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.booleans(), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2),
        st.lists(st.integers(0, 5), min_size=n, max_size=n),
    )
)


@settings(max_examples=150, deadline=None)
@given(graphs)
def test_alpha_matches_brute_force(data):
    n, bits, w = data
    adj = np.zeros((n, n), bool)
    for (i, j), b in zip(itertools.combinations(range(n), 2), bits):
        adj[i, j] = adj[j, i] = b
    g = ExclusivityGraph(adj, np.array(w, float))
    res = alpha(g)
    assert res.value == brute_alpha(g)
    assert is_stable(g, res.vertices)
    assert float(g.weights[list(res.vertices)].sum()) == res.value


def test_alpha_twenty_vertices_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(3):
        n = 20
        upper = np.triu(rng.random((n, n)) < 0.3, 1)
        g = ExclusivityGraph(upper | upper.T, rng.integers(1, 4, n).astype(float))
        assert alpha(g).value == brute_alpha(g)


def test_alpha_is_deterministic():
    g = build_graph(instrumental(3, 3, 3))
    assert alpha(g).vertices == alpha(g).vertices


@pytest.mark.parametrize(
    "s,count", [(instrumental(3, 2, 2), 32), (bell(2, 2, 2, 2), 16), (instrumental(2, 2, 2), 16)]
)
def test_strategy_counts(s, count):
    assert strategy_count(s) == count
    assert len(list(enumerate_strategies(s))) == count


def test_strategy_cap():
    with pytest.raises(StrategyCapExceeded):
        list(enumerate_strategies(instrumental(3, 3, 3), cap=10))


def test_oracle_examples():
    assert classical_max_oracle(catalog_get("bonet")) == 2
    assert classical_max_oracle(catalog_get("inst_chsh_422")) == 3
    pearl = pearl_family(2, 2, 2)[0]
    assert classical_max_oracle(pearl) == 1


def test_all_zero_strategy_distribution():
    s = instrumental(3, 2, 2)
    zero = next(iter(enumerate_strategies(s)))
    p = evaluate_strategy(zero, s)
    for x in range(3):
        assert p[Event((0, 0), (x,))] == 1
    assert evaluate(catalog_get("bonet"), p) == 2


@pytest.mark.parametrize("s", [instrumental(3, 2, 2), bell(2, 2, 2, 2), instrumental(2, 3, 2)])
def test_strategy_support_is_stable(s):
    g = build_graph(s)
    for strat in enumerate_strategies(s):
        p = evaluate_strategy(strat, s)
        support = [i for i, e in enumerate(g.vertices) if p[e] == 1]
        assert is_stable(g, support)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([(2, 2, 2), (3, 2, 2), (2, 3, 3), (3, 3, 2), (4, 2, 2)]), st.data())
def test_oracle_equals_weighted_alpha(spec, data):
    s = instrumental(*spec)
    events = enumerate_events(s)
    chosen = data.draw(st.lists(st.sampled_from(events), unique=True, min_size=1, max_size=12))
    weights = data.draw(st.lists(st.integers(0, 4), min_size=len(chosen), max_size=len(chosen)))
    ineq = LinearInequality(s, tuple(zip(chosen, map(float, weights))), 0.0)
    value, strat = best_strategy(ineq)
    assert value == alpha(support_graph(ineq)).value
    assert evaluate(ineq, evaluate_strategy(strat, s)) == value


def test_threaded_oracle_matches_serial():
    # three observed variables force the generic (non-matrix) scan
    from exclgraph.scenario import CausalScenario, Variable

    s = CausalScenario(
        (Variable("A", 2, ("X",)), Variable("B", 2, ("A",)), Variable("C", 2, ("B",))),
        (Variable("X", 2),),
    )
    events = enumerate_events(s)
    ineq = LinearInequality(s, tuple((e, float(i % 3)) for i, e in enumerate(events)), 0.0)
    assert best_strategy(ineq, workers=3) == best_strategy(ineq)
    assert best_strategy(ineq)[0] == alpha(support_graph(ineq)).value
