"""Exclusivity graphs built from causal scenarios.

Two events are exclusive when some observed variable sees identical parent
values in both events yet takes different outcomes: no response function
can produce both.  The latent is excluded from the parent comparison.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .scenario import CausalScenario, Event, ScenarioError, enumerate_events

LAYER_COLORS = ("red", "blue", "green", "orange", "purple", "brown", "cyan", "magenta")


@dataclass(frozen=True, eq=False)
class ExclusivityGraph:
    """Weighted simple undirected graph, dense boolean adjacency."""

    adjacency: np.ndarray
    weights: np.ndarray
    vertices: tuple = ()
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        adj = np.asarray(self.adjacency, dtype=bool)
        n = adj.shape[0] if adj.ndim == 2 else 0
        adj = adj.reshape(n, n)
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if adj.diagonal().any():
            raise ValueError("self-loops are not allowed")
        w = np.asarray(self.weights, dtype=float).reshape(n)
        if not np.all(np.isfinite(w)) or (w < 0).any():
            raise ValueError("weights must be finite and non-negative")
        adj.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "weights", w)
        if not self.vertices:
            object.__setattr__(self, "vertices", tuple(range(n)))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(v) for v in self.vertices))

    @classmethod
    def from_edges(cls, n: int, edges, weights=None) -> "ExclusivityGraph":
        adj = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            adj[i, j] = adj[j, i] = True
        return cls(adj, np.ones(n) if weights is None else weights)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def __len__(self) -> int:
        return self.n

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(i.tolist(), j.tolist()))

    @cached_property
    def neighbor_masks(self) -> tuple[int, ...]:
        """Neighbourhoods as integer bitsets, bit j set when j is adjacent."""
        masks = []
        for row in self.adjacency:
            m = 0
            for j in np.flatnonzero(row).tolist():
                m |= 1 << j
            masks.append(m)
        return tuple(masks)

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def with_weights(self, weights) -> "ExclusivityGraph":
        return ExclusivityGraph(self.adjacency, weights, self.vertices, self.labels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExclusivityGraph):
            return NotImplemented
        return (
            self.vertices == other.vertices
            and np.array_equal(self.adjacency, other.adjacency)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None  # type: ignore[assignment]

    def to_json(self, layers: dict[str, frozenset] | None = None) -> dict:
        out = {
            "vertices": list(self.labels),
            "weights": self.weights.tolist(),
            "edges": [list(e) for e in self.edges()],
        }
        if layers is not None:
            out["layers"] = {k: sorted(list(e) for e in v) for k, v in layers.items()}
        return out


@dataclass(frozen=True)
class ColoredMultigraph:
    base: ExclusivityGraph
    layers: dict[str, frozenset[tuple[int, int]]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return self.base.to_json(self.layers)


def _check_events(s: CausalScenario, *events: Event) -> None:
    for e in events:
        if not s.contains(e):
            raise ScenarioError(f"event {e} does not belong to the scenario")


def _parent_values(s: CausalScenario, e: Event, i: int) -> tuple[int, ...]:
    return tuple(e.outcomes[k] if kind == "o" else e.settings[k] for kind, k in s.parent_slots(i))


def are_exclusive(e1: Event, e2: Event, s: CausalScenario) -> tuple[bool, frozenset[str]]:
    """Exclusivity test plus the observed variables that witness it."""
    _check_events(s, e1, e2)
    witnesses = frozenset(
        v.name
        for i, v in enumerate(s.observed)
        if e1.outcomes[i] != e2.outcomes[i]
        and _parent_values(s, e1, i) == _parent_values(s, e2, i)
    )
    return bool(witnesses), witnesses


def _witness_matrices(s: CausalScenario, events: Sequence[Event]) -> dict[str, np.ndarray]:
    outs = np.array([e.outcomes for e in events], dtype=np.int64).reshape(len(events), len(s.observed))
    sets = np.array([e.settings for e in events], dtype=np.int64).reshape(len(events), len(s.instruments))
    layers = {}
    for i, v in enumerate(s.observed):
        differ = outs[:, i, None] != outs[None, :, i]
        for kind, k in s.parent_slots(i):
            col = outs[:, k] if kind == "o" else sets[:, k]
            differ &= col[:, None] == col[None, :]
        layers[v.name] = differ
    return layers


def build_graph(
    s: CausalScenario,
    events: Sequence[Event] | None = None,
    weights=None,
    strategy: str = "pairwise",
) -> ExclusivityGraph:
    """Exclusivity graph over ``events`` (default: the whole event space).

    ``strategy="bfs"`` explores the graph breadth-first from the first
    unexplored event, testing each dequeued event against every event not
    yet dequeued; it yields the same edge set as the pairwise default.
    """
    events = enumerate_events(s) if events is None else list(events)
    _check_events(s, *events)
    n = len(events)
    if strategy == "pairwise":
        adj = np.zeros((n, n), dtype=bool)
        for layer in _witness_matrices(s, events).values():
            adj |= layer
    elif strategy == "bfs":
        adj = _build_bfs(s, events)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    labels = tuple(s.event_label(e) for e in events)
    return ExclusivityGraph(adj, w, tuple(events), labels)


def _build_bfs(s: CausalScenario, events: list[Event]) -> np.ndarray:
    n = len(events)
    adj = np.zeros((n, n), dtype=bool)
    unvisited = list(range(n))
    done = [False] * n
    while unvisited:
        queue = deque([unvisited.pop(0)])
        while queue:
            v = queue.popleft()
            for u in range(n):
                if u == v or done[u]:
                    continue
                if are_exclusive(events[v], events[u], s)[0]:
                    adj[u, v] = adj[v, u] = True
                    if u in unvisited:
                        unvisited.remove(u)
                        queue.append(u)
            done[v] = True
    return adj


def induced_subgraph(g: ExclusivityGraph, idxs: Sequence[int]) -> ExclusivityGraph:
    idxs = [int(i) for i in idxs]
    if len(set(idxs)) != len(idxs):
        raise ValueError("indices must be distinct")
    if any(not 0 <= i < g.n for i in idxs):
        raise IndexError("vertex index out of range")
    sub = g.adjacency[np.ix_(idxs, idxs)]
    return ExclusivityGraph(
        sub,
        g.weights[idxs],
        tuple(g.vertices[i] for i in idxs),
        tuple(g.labels[i] for i in idxs),
    )


def complement(g: ExclusivityGraph) -> ExclusivityGraph:
    adj = ~g.adjacency
    np.fill_diagonal(adj, False)
    return ExclusivityGraph(adj, g.weights, g.vertices, g.labels)


def colored_layers(s: CausalScenario, g: ExclusivityGraph) -> ColoredMultigraph:
    """Split the edges of ``g`` by the observed variable witnessing them."""
    if not all(isinstance(v, Event) for v in g.vertices):
        raise ValueError("graph vertices must be events of the scenario")
    _check_events(s, *g.vertices)
    layers = {}
    for name, mat in _witness_matrices(s, g.vertices).items():
        i, j = np.nonzero(np.triu(mat & g.adjacency, 1))
        layers[name] = frozenset(zip(i.tolist(), j.tolist()))
    return ColoredMultigraph(g, layers)


def cycle_graph(n: int) -> ExclusivityGraph:
    return ExclusivityGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> ExclusivityGraph:
    adj = ~np.eye(n, dtype=bool)
    return ExclusivityGraph(adj, np.ones(n))


def export_dot(g: ExclusivityGraph | ColoredMultigraph, name: str = "exclusivity") -> str:
    """Graphviz text; edges of a multigraph carry one color per layer."""
    base = g.base if isinstance(g, ColoredMultigraph) else g
    lines = [f"graph {name} {{"]
    for i, lab in enumerate(base.labels):
        attrs = f'label="{lab}"'
        if base.weights[i] != 1.0:
            attrs += f', weight="{base.weights[i]:.7g}"'
        lines.append(f"  {i} [{attrs}];")
    if isinstance(g, ColoredMultigraph):
        for k, layer in enumerate(sorted(g.layers)):
            color = LAYER_COLORS[k % len(LAYER_COLORS)]
            for i, j in sorted(g.layers[layer]):
                lines.append(f'  {i} -- {j} [color={color}, layer="{layer}"];')
    else:
        for i, j in base.edges():
            lines.append(f"  {i} -- {j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dump_json(g: ExclusivityGraph | ColoredMultigraph) -> str:
    return json.dumps(g.to_json(), sort_keys=True)
