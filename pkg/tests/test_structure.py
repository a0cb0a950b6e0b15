import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exclgraph import (
    Event,
    IsomorphismSizeError,
    UnverifiedHoleError,
    are_isomorphic,
    build_graph,
    catalog_get,
    cycle_graph,
    family_grid,
    find_odd_antiholes,
    find_odd_holes,
    hole_to_inequality,
    instrumental,
    perfect_verdict,
    scan_family,
    support_graph,
)
from exclgraph.graph import ExclusivityGraph, complement, complete_graph
from exclgraph.structure import Appearance, appearances_csv, verify_cycle


def brute_holes(adj: np.ndarray, max_len: int) -> set[frozenset]:
    """Vertex sets inducing a cycle: connected, 2-regular, odd size >= 5."""
    n = adj.shape[0]
    out = set()
    for L in range(5, max_len + 1, 2):
        for sub in itertools.combinations(range(n), L):
            a = adj[np.ix_(sub, sub)]
            if not (a.sum(1) == 2).all():
                continue
            seen, stack = {0}, [0]
            while stack:
                v = stack.pop()
                for u in np.flatnonzero(a[v]).tolist():
                    if u not in seen:
                        seen.add(u)
                        stack.append(u)
            if len(seen) == L:
                out.add(frozenset(sub))
    return out


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) < p, 1)
    return ExclusivityGraph(upper | upper.T, np.ones(n))


def test_plain_cycles():
    rep = find_odd_holes(cycle_graph(7))
    assert [h.length for h in rep.holes] == [7] and rep.exhaustive
    anti = find_odd_antiholes(complement(cycle_graph(7)))
    assert [h.length for h in anti.holes] == [7]
    anti5 = find_odd_antiholes(cycle_graph(5))
    assert [h.length for h in anti5.holes] == [5]


@settings(max_examples=40, deadline=None)
@given(st.integers(5, 11), st.floats(0.2, 0.6), st.integers(0, 10_000))
def test_holes_match_brute_force(n, p, seed):
    g = random_graph(n, p, seed)
    want = brute_holes(g.adjacency, n)
    for engine in ("compiled", "python"):
        rep = find_odd_holes(g, max_len=n, engine=engine)
        got = [frozenset(h.vertices) for h in rep.holes]
        assert len(got) == len(set(got))
        assert set(got) == want


@pytest.mark.parametrize("spec", [(3, 2, 2), (4, 2, 2), (3, 3, 2)])
def test_compiled_kernel_matches_python(spec):
    g = build_graph(instrumental(*spec))
    a = find_odd_holes(g, 9, engine="compiled")
    b = find_odd_holes(g, 9, engine="python")
    assert a.holes == b.holes and a.nodes == b.nodes


def test_workers_match_serial():
    g = build_graph(instrumental(4, 3, 2))
    assert find_odd_holes(g, 7, workers=3).holes == find_odd_holes(g, 7).holes


def test_budget_marks_search_incomplete():
    g = build_graph(instrumental(4, 3, 3))
    rep = find_odd_holes(g, 11, budget=100)
    assert not rep.exhaustive


def test_l2_scenarios_have_no_holes():
    for spec in [(2, 2, 2), (2, 3, 3)]:
        g = build_graph(instrumental(*spec))
        assert find_odd_holes(g, g.n).holes == []
        assert find_odd_antiholes(g, g.n).holes == []


def test_l3_contains_bonet_pentagon():
    g = build_graph(instrumental(3, 2, 2))
    holes = {frozenset(g.vertices[i] for i in h.vertices) for h in find_odd_holes(g).holes}
    assert frozenset(catalog_get("bonet").events) in holes


def test_l5_only_pentagons():
    g = build_graph(instrumental(5, 2, 2))
    assert find_odd_holes(g, 11).lengths() == {5}


def test_perfect_verdicts():
    assert perfect_verdict(build_graph(instrumental(2, 3, 3)), max_len=18).status == "perfect"
    v = perfect_verdict(build_graph(instrumental(3, 2, 2)))
    assert v.status == "imperfect" and v.witness.length == 5
    assert perfect_verdict(complete_graph(6)).status == "perfect"
    assert perfect_verdict(build_graph(instrumental(2, 3, 3)), max_len=7).status == "unknown"


# -- hole to inequality -------------------------------------------------------


def test_bonet_pentagon_inequality():
    s = instrumental(3, 2, 2)
    g = build_graph(s)
    idx = [g.vertices.index(e) for e in catalog_get("bonet").events]
    order = next(p for p in itertools.permutations(idx) if p[0] == idx[0] and verify_cycle(g.adjacency, p))
    q = hole_to_inequality(order, g, s)
    assert set(q.events) == set(catalog_get("bonet").events)
    assert q.classical_bound == 2 and q.provenance == "mined"


def _relabelings(l, m, n):
    for px in itertools.permutations(range(l)):
        for pa in itertools.permutations(range(m)):
            for pbs in itertools.product(itertools.permutations(range(n)), repeat=m):
                yield px, pa, pbs


def _apply(ev, px, pa, pbs):
    (a, b), (x,) = ev.outcomes, ev.settings
    return Event((pa[a], pbs[a][b]), (px[x],))


def test_mined_c7_is_in_catalog_orbit():
    s = instrumental(4, 3, 3)
    g = build_graph(s)
    target = frozenset(catalog_get("c7_433").events)
    orbit = {frozenset(_apply(e, *r) for e in target) for r in _relabelings(4, 3, 3)}
    rep = find_odd_holes(g, 7, lengths=[7], stop_at_first=True)
    q = hole_to_inequality(rep.holes[0], g, s)
    assert len(q.terms) == 7 and q.classical_bound == 3
    assert frozenset(q.events) in orbit


def test_nine_hole_bound():
    s = instrumental(6, 3, 3)
    g = build_graph(s)
    rep = find_odd_holes(g, 9, lengths=[9], stop_at_first=True)
    assert hole_to_inequality(rep.holes[0], g, s).classical_bound == 4


def test_unverified_hole_rejected():
    s = instrumental(3, 2, 2)
    g = build_graph(s)
    with pytest.raises(UnverifiedHoleError):
        hole_to_inequality([0, 1, 2, 3, 4], g, s)


# -- isomorphism ----------------------------------------------------------------


def brute_isomorphic(g1, g2):
    if g1.n != g2.n:
        return False
    return any(
        np.array_equal(g1.adjacency, g2.adjacency[np.ix_(p, p)]) for p in itertools.permutations(range(g1.n))
    )


def test_isomorphism_examples():
    assert not are_isomorphic(cycle_graph(5), cycle_graph(7))[0]
    g = support_graph(catalog_get("c7_433"))
    ok, mapping = are_isomorphic(g, g)
    assert ok and mapping == {i: i for i in range(g.n)}
    ok, mapping = are_isomorphic(support_graph(catalog_get("inst_chsh_422")), support_graph(catalog_get("chsh_bell")))
    assert ok
    with pytest.raises(IsomorphismSizeError):
        are_isomorphic(build_graph(instrumental(3, 3, 2)), build_graph(instrumental(3, 3, 2)))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7), st.floats(0.1, 0.9), st.integers(0, 10_000), st.booleans())
def test_isomorphism_matches_brute_force(n, p, seed, permute):
    g1 = random_graph(n, p, seed)
    if permute:
        perm = np.random.default_rng(seed).permutation(n)
        g2 = ExclusivityGraph(g1.adjacency[np.ix_(perm, perm)], np.ones(n))
    else:
        g2 = random_graph(n, p, seed + 1)
    ok, mapping = are_isomorphic(g1, g2)
    assert ok == brute_isomorphic(g1, g2)
    if ok:
        for i, j in itertools.combinations(range(n), 2):
            assert g1.adjacency[i, j] == g2.adjacency[mapping[i], mapping[j]]


# -- family sweeps ----------------------------------------------------------------


def test_family_grid_order():
    pts = family_grid(3, 3)
    assert pts == sorted(pts) and pts[0] == (2, 2, 2) and (3, 3, 3) in pts
    assert family_grid(4, 3, n_equals_m=True) == [(l, m, m) for l in range(2, 5) for m in (2, 3)]


def test_pentagon_first_appears_at_l3():
    rows = scan_family(family_grid(3, 3), lengths=[5])
    assert rows[0].point == (3, 2, 2)


def test_appearances_csv_format():
    text = appearances_csv([Appearance(5, (3, 2, 2), ("00|0", "11|0")), Appearance(13, None)])
    assert text == "cycle_length,l,m,n,witness_vertices\n5,3,2,2,00|0 11|0\n13,,,,\n"
