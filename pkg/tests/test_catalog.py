import json

import pytest

from exclgraph import (
    Distribution,
    Event,
    LinearInequality,
    MissingProbabilityError,
    alpha,
    best_strategy,
    catalog_get,
    catalog_names,
    cglmp_alpha,
    cglmp_full,
    cglmp_s,
    cycle_graph,
    evaluate,
    evaluate_strategy,
    instrumental,
    pearl_family,
    resolve_inequality,
    support_graph,
)
from exclgraph.classical import enumerate_strategies
from exclgraph.structure import are_isomorphic


def test_pearl_counts():
    fam = pearl_family(2, 2, 2)
    assert len(fam) == 8
    cross = [q for q in fam if len({e.settings for e in q.events}) == 2]
    assert len(cross) == 4
    assert len(pearl_family(3, 2, 2)) == 18


def test_pearl_on_uniform_is_half():
    for q in pearl_family(3, 2, 2):
        assert evaluate(q, Distribution.uniform(q.scenario)) == pytest.approx(0.5)


def test_pearl_l2_support_is_edge_or_clique():
    for q in pearl_family(2, 3, 3):
        g = support_graph(q)
        assert alpha(g).value == 1


def test_named_entries():
    bonet = catalog_get("bonet")
    assert [bonet.scenario.event_label(e) for e in bonet.events] == ["00|0", "11|0", "00|1", "10|1", "01|2"]
    assert bonet.classical_bound == 2
    c7 = catalog_get("c7_433")
    assert [c7.scenario.event_label(e) for e in c7.events][:2] == ["00|2", "02|3"]
    assert len(c7.terms) == 7 and c7.classical_bound == 3
    chsh = catalog_get("inst_chsh_422")
    assert len(chsh.terms) == 8 and chsh.classical_bound == 3
    assert are_isomorphic(support_graph(chsh), support_graph(catalog_get("chsh_bell")))[0]
    with pytest.raises(KeyError):
        catalog_get("nope")


@pytest.mark.parametrize("name", ["bonet", "c7_433", "inst_chsh_422", "chsh_bell"])
def test_catalog_bounds_are_exact(name):
    q = catalog_get(name)
    assert alpha(support_graph(q)).value == q.classical_bound
    assert best_strategy(q)[0] == q.classical_bound


def test_support_graphs():
    assert are_isomorphic(support_graph(catalog_get("bonet")), cycle_graph(5))[0]
    assert are_isomorphic(support_graph(catalog_get("c7_433")), cycle_graph(7))[0]


@pytest.mark.parametrize("d,bound", [(2, 3), (3, 6)])
def test_cglmp_full_bounds(d, bound):
    q = cglmp_full(d)
    assert q.classical_bound == bound
    assert best_strategy(q)[0] == bound
    assert alpha(support_graph(q)).value == bound


@pytest.mark.parametrize("d,k,value", [(5, 1, 4), (3, 0, 3), (13, 3, 4)])
def test_cglmp_rule_examples(d, k, value):
    assert cglmp_alpha(d, k) == value


def test_cglmp_rule_large_instance_by_alpha():
    g = support_graph(cglmp_s(13, 3))
    assert g.n == 52
    assert alpha(g).value == 4


@pytest.mark.parametrize("d,k", [(3, 0), (4, 1), (5, 2)])
def test_cglmp_block_structure(d, k):
    g = support_graph(cglmp_s(d, k))
    ctx = [e.settings for e in g.vertices]
    groups = sorted(set(ctx))
    assert len(groups) == 4
    for c in groups:
        idx = [i for i in range(g.n) if ctx[i] == c]
        assert len(idx) == d
        assert all(g.adjacency[i, j] for i in idx for j in idx if i != j)
    for c1 in groups:
        for c2 in groups:
            shared = (c1[0] == c2[0]) + (c1[1] == c2[1])
            if c1 == c2 or shared != 1:
                continue
            for i in (i for i in range(g.n) if ctx[i] == c1):
                nbrs = sum(g.adjacency[i, j] for j in range(g.n) if ctx[j] == c2)
                assert nbrs == d - 1


def test_evaluate_examples():
    bonet = catalog_get("bonet")
    s = bonet.scenario
    zero = next(iter(enumerate_strategies(s)))
    assert evaluate(bonet, evaluate_strategy(zero, s)) == 2
    with pytest.raises(MissingProbabilityError):
        evaluate(bonet, {})
    chsh = catalog_get("chsh_bell")
    assert evaluate(chsh, Distribution.uniform(chsh.scenario)) == pytest.approx(2)


@pytest.mark.parametrize("name", catalog_names())
def test_json_roundtrip(name):
    q = catalog_get(name)
    back = LinearInequality.from_json(json.dumps(q.to_json()))
    assert back == q


def test_resolve_inequality_forms(tmp_path):
    assert resolve_inequality("cglmp_s:5,1") == cglmp_s(5, 1)
    assert resolve_inequality("cglmp:3") == cglmp_full(3)
    assert resolve_inequality("pearl:2,2,2:3") == pearl_family(2, 2, 2)[3]
    path = tmp_path / "q.json"
    path.write_text(json.dumps(catalog_get("bonet").to_json()))
    assert resolve_inequality(str(path)) == catalog_get("bonet")
    with pytest.raises(ValueError):
        resolve_inequality("cglmp_s:5")


def test_inequality_validation():
    s = instrumental(2, 2, 2)
    with pytest.raises(ValueError):
        LinearInequality(s, ((Event((0, 0), (5,)), 1.0),), 1.0)
    with pytest.raises(ValueError):
        LinearInequality(s, ((Event((0, 0), (0,)), 1.0), (Event((0, 0), (0,)), 1.0)), 1.0)
