"""Exact classical bounds.

Two independent routes to the same number: a branch-and-bound maximum
weight stable set on the exclusivity graph, and brute force over every
deterministic response-function assignment of the causal model.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterator

import numpy as np

from .graph import ExclusivityGraph
from .scenario import CausalScenario, Distribution, Event, enumerate_events

if TYPE_CHECKING:
    from .catalog import LinearInequality

DEFAULT_STRATEGY_CAP = 10**8


class StrategyCapExceeded(RuntimeError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"{count} deterministic strategies exceed the cap of {cap}")
        self.count = count
        self.cap = cap


@dataclass(frozen=True)
class StableSetResult:
    value: float
    vertices: tuple[int, ...]
    proof: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DeterministicStrategy:
    """One response table per observed variable.

    ``responses[i][k]`` is the outcome of observed variable ``i`` when its
    (non-latent) parents take the ``k``-th joint value in mixed-radix order.
    """

    responses: tuple[tuple[int, ...], ...]

    def respond(self, s: CausalScenario, i: int, parent_values: tuple[int, ...]) -> int:
        k = 0
        for val, c in zip(parent_values, _parent_cards(s, i)):
            k = k * c + val
        return self.responses[i][k]


# -- maximum weight stable set ----------------------------------------------


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _StableSetSearch:
    """Branch and bound over vertices relabelled by (weight desc, degree asc, index)."""

    def __init__(self, g: ExclusivityGraph):
        n = g.n
        deg = g.degrees()
        self.order = sorted(range(n), key=lambda v: (-g.weights[v], deg[v], v))
        rank = {v: r for r, v in enumerate(self.order)}
        self.w = [float(g.weights[v]) for v in self.order]
        self.nbr = [0] * n
        for v in range(n):
            m = 0
            for u in _bits(g.neighbor_masks[v]):
                m |= 1 << rank[u]
            self.nbr[rank[v]] = m
        self.best = -1.0
        self.best_set = 0
        self.nodes = 0

    def clique_cover_bound(self, cand: int) -> float:
        # greedy partition into cliques, each charged its heaviest (first) vertex
        total = 0.0
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            total += self.w[v]
            cand ^= low
            common = cand & self.nbr[v]
            while common:
                lu = common & -common
                u = lu.bit_length() - 1
                cand ^= lu
                common &= self.nbr[u] & ~lu
        return total

    def run(self, cand: int, chosen: int, value: float) -> None:
        self.nodes += 1
        if not cand:
            if value > self.best:
                self.best, self.best_set = value, chosen
            return
        if value + self.clique_cover_bound(cand) <= self.best:
            return
        low = cand & -cand
        v = low.bit_length() - 1
        self.run(cand & ~low & ~self.nbr[v], chosen | low, value + self.w[v])
        self.run(cand & ~low, chosen, value)


def alpha(g: ExclusivityGraph) -> StableSetResult:
    """Exact weighted independence number with a witness stable set."""
    if g.n == 0:
        return StableSetResult(0.0, (), {"nodes": 0, "bound": "greedy clique cover"})
    search = _StableSetSearch(g)
    search.run((1 << g.n) - 1, 0, 0.0)
    verts = tuple(sorted(search.order[r] for r in _bits(search.best_set)))
    value = float(sum(g.weights[v] for v in verts))
    return StableSetResult(value, verts, {"nodes": search.nodes, "bound": "greedy clique cover"})


def is_stable(g: ExclusivityGraph, verts) -> bool:
    verts = list(verts)
    return not g.adjacency[np.ix_(verts, verts)].any() if verts else True


# -- deterministic strategies -------------------------------------------------


def _parent_cards(s: CausalScenario, i: int) -> tuple[int, ...]:
    cards = []
    for kind, k in s.parent_slots(i):
        cards.append(s.observed[k].card if kind == "o" else s.instruments[k].card)
    return tuple(cards)


def strategy_count(s: CausalScenario) -> int:
    return math.prod(v.card ** math.prod(_parent_cards(s, i)) for i, v in enumerate(s.observed))


def enumerate_strategies(
    s: CausalScenario, cap: int = DEFAULT_STRATEGY_CAP
) -> Iterator[DeterministicStrategy]:
    count = strategy_count(s)
    if count > cap:
        raise StrategyCapExceeded(count, cap)
    tables = [
        itertools.product(range(v.card), repeat=math.prod(_parent_cards(s, i)))
        for i, v in enumerate(s.observed)
    ]
    for combo in itertools.product(*(list(t) for t in tables)):
        yield DeterministicStrategy(tuple(combo))


def _run_strategy(st: DeterministicStrategy, s: CausalScenario, x: tuple[int, ...]) -> Event:
    outs = [0] * len(s.observed)
    for i in s.topological_order:
        pv = tuple(outs[k] if kind == "o" else x[k] for kind, k in s.parent_slots(i))
        outs[i] = st.respond(s, i, pv)
    return Event(tuple(outs), x)


def evaluate_strategy(st: DeterministicStrategy, s: CausalScenario) -> Distribution:
    table = {e: 0.0 for e in enumerate_events(s)}
    for x in s.settings_space():
        table[_run_strategy(st, s, x)] = 1.0
    return Distribution(s, table)


def _term_table_indices(s: CausalScenario, events: list[Event]) -> np.ndarray:
    """For each term event and observed variable, the response-table slot it reads."""
    idx = np.zeros((len(events), len(s.observed)), dtype=np.int64)
    for t, e in enumerate(events):
        for i in range(len(s.observed)):
            k = 0
            for (kind, j), c in zip(s.parent_slots(i), _parent_cards(s, i)):
                k = k * c + (e.outcomes[j] if kind == "o" else e.settings[j])
            idx[t, i] = k
    return idx


def best_strategy(
    ineq: "LinearInequality", cap: int = DEFAULT_STRATEGY_CAP, workers: int = 1
) -> tuple[float, DeterministicStrategy]:
    """Maximum of the inequality over deterministic strategies, with a maximiser.

    A term contributes when every observed variable's response, evaluated at
    the term's parent values, reproduces the term's outcome.
    """
    s = ineq.scenario
    count = strategy_count(s)
    if count > cap:
        raise StrategyCapExceeded(count, cap)
    events = [e for e, _ in ineq.terms]
    w = np.array([wt for _, wt in ineq.terms], dtype=float)
    slots = _term_table_indices(s, events)
    outs = np.array([e.outcomes for e in events], dtype=np.int64)
    n_obs = len(s.observed)
    # hits[i][r, t]: response table r of variable i reproduces term t
    hits = []
    tables = []
    for i, v in enumerate(s.observed):
        size = math.prod(_parent_cards(s, i))
        tab = np.array(list(itertools.product(range(v.card), repeat=size)), dtype=np.int64)
        tables.append(tab)
        hits.append(tab[:, slots[:, i]] == outs[None, :, i])

    def scan(first: range) -> tuple[float, tuple[int, ...]]:
        best, arg = -math.inf, ()
        rest = [range(len(t)) for t in tables[1:]]
        for r0 in first:
            for combo in itertools.product(*rest):
                mask = hits[0][r0].copy()
                for i in range(1, n_obs):
                    mask &= hits[i][combo[i - 1]]
                val = float(w[mask].sum())
                if val > best:
                    best, arg = val, (r0, *combo)
        return best, arg

    n0 = len(tables[0])
    if n_obs == 2:
        values = (hits[0] * w) @ hits[1].T.astype(float)
        r0, r1 = np.unravel_index(int(np.argmax(values)), values.shape)
        best, arg = float(values[r0, r1]), (int(r0), int(r1))
    elif workers > 1:
        chunks = [range(k, min(k + math.ceil(n0 / workers), n0)) for k in range(0, n0, math.ceil(n0 / workers))]
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(scan, chunks))
        # first chunk wins ties, matching the serial scan order
        best, arg = parts[0]
        for val, a in parts[1:]:
            if val > best:
                best, arg = val, a
    else:
        best, arg = scan(range(n0))
    st = DeterministicStrategy(tuple(tuple(tables[i][r].tolist()) for i, r in enumerate(arg)))
    return best, st


def classical_max_oracle(
    ineq: "LinearInequality", cap: int = DEFAULT_STRATEGY_CAP, workers: int = 1
) -> float:
    return best_strategy(ineq, cap, workers)[0]
