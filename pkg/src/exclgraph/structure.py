"""Odd holes and antiholes, bounded perfectness verdicts, family sweeps,
hole-to-inequality extraction and small-graph isomorphism."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .catalog import LinearInequality
from .graph import ExclusivityGraph, build_graph, complement
from .scenario import CausalScenario, Event, instrumental

ISOMORPHISM_CAP = 16


@dataclass(frozen=True)
class Hole:
    length: int
    vertices: tuple[int, ...]
    kind: str = "hole"


@dataclass
class HoleReport:
    holes: list[Hole]
    max_len: int
    exhaustive: bool
    nodes: int = 0

    def lengths(self) -> set[int]:
        return {h.length for h in self.holes}


@dataclass
class PerfectVerdict:
    status: str
    witness: Hole | None = None


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _masks(adj: np.ndarray) -> list[int]:
    out = []
    for row in adj:
        m = 0
        for j in np.flatnonzero(row).tolist():
            m |= 1 << j
        out.append(m)
    return out


def _search_start(args) -> tuple[list[tuple[int, ...]], int, bool]:
    """All canonical chordless cycles whose minimum vertex is ``start``.

    Canonical form: the cycle is listed from its minimum vertex v0, and the
    second vertex is smaller than the last, so each cycle appears once.
    """
    nbr, start, lengths, stop_at_first, budget = args
    n = len(nbr)
    allowed = ((1 << n) - 1) & ~((1 << (start + 1)) - 1)
    n0 = nbr[start]
    longest = max(lengths)
    found: list[tuple[int, ...]] = []
    nodes = 0
    path = [start]

    def dfs(last: int, block: int) -> bool:
        # path holds len(path) vertices; block = closed nbhds of interior vertices
        nonlocal nodes
        nodes += 1
        if budget is not None and nodes > budget:
            return False
        k = len(path)
        cand = nbr[last] & allowed & ~block
        if k + 1 in lengths and k + 1 >= 5:
            v1 = path[1]
            for u in _bits(cand & n0 & ~((1 << (v1 + 1)) - 1)):
                found.append(tuple(path) + (u,))
                if stop_at_first:
                    return False
        if k + 2 <= longest:
            new_block = block | nbr[last] | (1 << last) if k > 1 else block
            for u in _bits(cand & ~n0):
                path.append(u)
                go_on = dfs(u, new_block)
                path.pop()
                if not go_on:
                    return False
        return True

    for v1 in _bits(n0 & allowed):
        path.append(v1)
        ok = dfs(v1, 0)
        path.pop()
        if not ok:
            break
    return found, nodes, budget is None or nodes <= budget


def _search_start_compiled(args) -> tuple[list[tuple[int, ...]], int, bool]:
    words, start, lengths, stop_at_first, budget = args
    from ._holekernel import search_start

    longest = max(lengths)
    want = np.zeros(longest + 1, dtype=np.bool_)
    want[list(lengths)] = True
    cap = 1024
    while True:
        out = np.empty((cap, longest), dtype=np.int64)
        count, nodes, complete = search_start(
            words, start, want, longest, stop_at_first, -1 if budget is None else budget, out
        )
        if count <= cap:
            break
        cap = count
    found = [tuple(int(v) for v in row if v >= 0) for row in out[:count]]
    return found, int(nodes), bool(complete)


def _find_cycles(
    adj: np.ndarray,
    max_len: int,
    lengths: Iterable[int] | None,
    stop_at_first: bool,
    budget: int | None,
    workers: int,
    kind: str,
    engine: str = "compiled",
) -> HoleReport:
    n = adj.shape[0]
    want = {L for L in (lengths or range(5, max_len + 1)) if L >= 5 and L % 2 == 1 and L <= max_len}
    if not want or n < 5:
        return HoleReport([], max_len, True, 0)
    nbr = _masks(adj)
    if engine == "compiled":
        from ._holekernel import to_words

        search, graph_arg = _search_start_compiled, to_words(nbr, n)
    elif engine == "python":
        search, graph_arg = _search_start, nbr
    else:
        raise ValueError(f"unknown engine {engine!r}")
    jobs = [(graph_arg, s, frozenset(want), stop_at_first, budget) for s in range(n - 4)]
    holes: list[Hole] = []
    nodes = 0
    exhaustive = True
    if workers > 1 and not stop_at_first:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(search, jobs))
    else:
        parts = []
        for job in jobs:
            part = search(job)
            parts.append(part)
            if stop_at_first and part[0]:
                break
            if budget is not None and not part[2]:
                break
    for found, cnt, complete in parts:
        nodes += cnt
        exhaustive &= complete
        holes.extend(Hole(len(c), c, kind) for c in found)
    if stop_at_first and holes:
        exhaustive = False
    holes.sort(key=lambda h: (h.length, h.vertices))
    for h in holes:
        if not verify_cycle(adj, h.vertices):
            raise AssertionError(f"emitted cycle {h.vertices} is not chordless")
    return HoleReport(holes, max_len, exhaustive, nodes)


def verify_cycle(adj: np.ndarray, cycle: Sequence[int]) -> bool:
    """True when ``cycle`` lists an induced chordless cycle in order."""
    n = len(cycle)
    if n < 3 or len(set(cycle)) != n:
        return False
    sub = adj[np.ix_(cycle, cycle)]
    if sub.sum() != 2 * n:
        return False
    return all(sub[i, (i + 1) % n] for i in range(n))


def find_odd_holes(
    g: ExclusivityGraph,
    max_len: int = 11,
    lengths: Iterable[int] | None = None,
    stop_at_first: bool = False,
    budget: int | None = None,
    workers: int = 1,
    engine: str = "compiled",
) -> HoleReport:
    """Induced chordless odd cycles of length 5..max_len.

    ``exhaustive`` is true only when the search finished without a budget
    cut-off or an early stop.  ``engine="python"`` runs the slower reference
    search, kept for cross-checking the compiled kernel.
    """
    return _find_cycles(g.adjacency, max_len, lengths, stop_at_first, budget, workers, "hole", engine)


def find_odd_antiholes(
    g: ExclusivityGraph,
    max_len: int = 11,
    lengths: Iterable[int] | None = None,
    stop_at_first: bool = False,
    budget: int | None = None,
    workers: int = 1,
    engine: str = "compiled",
) -> HoleReport:
    """Odd holes of the complement, listed in the complement's cycle order."""
    return _find_cycles(
        complement(g).adjacency, max_len, lengths, stop_at_first, budget, workers, "antihole", engine
    )


def perfect_verdict(g: ExclusivityGraph, max_len: int = 11, budget: int | None = None) -> PerfectVerdict:
    holes = find_odd_holes(g, max_len, stop_at_first=True, budget=budget)
    if holes.holes:
        return PerfectVerdict("imperfect", holes.holes[0])
    anti = find_odd_antiholes(g, max_len, stop_at_first=True, budget=budget)
    if anti.holes:
        return PerfectVerdict("imperfect", anti.holes[0])
    if holes.exhaustive and anti.exhaustive and max_len >= g.n:
        return PerfectVerdict("perfect")
    return PerfectVerdict("unknown")


# -- family sweeps -----------------------------------------------------------


@dataclass
class Appearance:
    length: int
    point: tuple[int, int, int] | None
    witness: tuple[str, ...] = ()


def family_grid(l_max: int, m_max: int, n_max: int | None = None, n_equals_m: bool = False,
                l_min: int = 2, m_min: int = 2) -> list[tuple[int, int, int]]:
    """Lexicographic (l, m, n) points; ``n_equals_m`` ties n to m."""
    pts = []
    for l in range(l_min, l_max + 1):
        for m in range(m_min, m_max + 1):
            if n_equals_m:
                pts.append((l, m, m))
            else:
                pts.extend((l, m, n) for n in range(2, (n_max or m_max) + 1))
    return pts


def scan_family(
    points: Sequence[tuple[int, int, int]],
    lengths: Sequence[int] = (5, 7, 9, 11),
    workers: int = 1,
) -> list[Appearance]:
    """First grid point (lexicographic) whose instrumental graph has each hole length.

    Absence at every earlier point is established by an exhaustive search
    for that length alone.
    """
    remaining = sorted(set(lengths))
    first: dict[int, Appearance] = {}
    for pt in sorted(points):
        if not remaining:
            break
        s = instrumental(*pt)
        g = build_graph(s)
        for L in list(remaining):
            rep = find_odd_holes(g, max_len=L, lengths=[L], stop_at_first=True, workers=workers)
            if rep.holes:
                h = rep.holes[0]
                first[L] = Appearance(L, pt, tuple(g.labels[i] for i in h.vertices))
                remaining.remove(L)
    return [first.get(L, Appearance(L, None)) for L in sorted(set(lengths))]


def appearances_csv(rows: Sequence[Appearance]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cycle_length", "l", "m", "n", "witness_vertices"])
    for r in rows:
        l, m, n = r.point if r.point else ("", "", "")
        w.writerow([r.length, l, m, n, " ".join(r.witness)])
    return buf.getvalue()


# -- inequalities from holes -------------------------------------------------


class UnverifiedHoleError(ValueError):
    pass


def hole_to_inequality(hole: Hole | Sequence[int], g: ExclusivityGraph, scenario: CausalScenario) -> LinearInequality:
    """Unit-weight inequality on a verified odd hole; bound floor(n/2)."""
    verts = tuple(hole.vertices if isinstance(hole, Hole) else hole)
    if len(verts) < 5 or len(verts) % 2 == 0 or not verify_cycle(g.adjacency, verts):
        raise UnverifiedHoleError(f"{verts} is not an induced odd cycle of length >= 5")
    events = [g.vertices[i] for i in verts]
    if not all(isinstance(e, Event) for e in events):
        raise UnverifiedHoleError("graph vertices must be events")
    return LinearInequality(
        scenario, tuple((e, 1.0) for e in events), float(len(verts) // 2), "mined",
        f"odd hole of length {len(verts)}",
    )


# -- isomorphism -------------------------------------------------------------


class IsomorphismSizeError(ValueError):
    pass


def are_isomorphic(g1: ExclusivityGraph, g2: ExclusivityGraph) -> tuple[bool, dict[int, int] | None]:
    """Exact backtracking isomorphism test with degree-based pruning."""
    n = g1.n
    if max(n, g2.n) > ISOMORPHISM_CAP:
        raise IsomorphismSizeError(f"exhaustive isomorphism is limited to {ISOMORPHISM_CAP} vertices")
    if n != g2.n:
        return False, None
    a1, a2 = g1.adjacency, g2.adjacency
    if a1.sum() != a2.sum():
        return False, None
    d1, d2 = a1.sum(1), a2.sum(1)
    if sorted(d1) != sorted(d2):
        return False, None

    def signature(adj, deg):
        return [(deg[v], tuple(sorted(deg[adj[v]]))) for v in range(n)]

    s1, s2 = signature(a1, d1), signature(a2, d2)
    if sorted(s1) != sorted(s2):
        return False, None
    order = sorted(range(n), key=lambda v: (-d1[v], v))
    mapping: dict[int, int] = {}
    used = [False] * n

    def extend(pos: int) -> bool:
        if pos == n:
            return True
        v = order[pos]
        for u in range(n):
            if used[u] or s1[v] != s2[u]:
                continue
            if any(a1[v, w] != a2[u, mapping[w]] for w in mapping):
                continue
            mapping[v] = u
            used[u] = True
            if extend(pos + 1):
                return True
            del mapping[v]
            used[u] = False
        return False

    if extend(0):
        return True, dict(sorted(mapping.items()))
    return False, None
