"""Named instrumental and Bell inequalities as weighted event lists."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Mapping

from .graph import ExclusivityGraph, build_graph
from .scenario import CausalScenario, Distribution, Event, as_scenario, bell, instrumental


class MissingProbabilityError(KeyError):
    pass


@dataclass(frozen=True)
class LinearInequality:
    """``sum_t weight_t * p(event_t) <= classical_bound``."""

    scenario: CausalScenario
    terms: tuple[tuple[Event, float], ...]
    classical_bound: float
    provenance: str = "mined"
    citation: str = ""
    ceiling: float | None = None
    ceiling_note: str = ""

    def __post_init__(self) -> None:
        if not self.terms:
            raise ValueError("inequality needs at least one term")
        seen = set()
        for e, w in self.terms:
            if not self.scenario.contains(e):
                raise ValueError(f"event {e} not in scenario")
            if not float("-inf") < w < float("inf"):
                raise ValueError("weights must be finite")
            if e in seen:
                raise ValueError(f"duplicate event {e}")
            seen.add(e)

    @property
    def events(self) -> list[Event]:
        return [e for e, _ in self.terms]

    @property
    def weights(self) -> list[float]:
        return [w for _, w in self.terms]

    def describe(self) -> str:
        parts = []
        for e, w in self.terms:
            coef = "" if w == 1 else f"{w:g}*"
            parts.append(f"{coef}P({self.scenario.event_label(e)})")
        return " + ".join(parts) + f" <= {self.classical_bound:g}"

    def to_json(self) -> dict:
        s = self.scenario
        out = {
            "scenario": s.shorthand() or s.to_json(),
            "terms": [{"event": s.event_label(e), "weight": w} for e, w in self.terms],
            "classical_bound": self.classical_bound,
            "provenance": self.provenance,
            "citation": self.citation,
        }
        if self.ceiling is not None:
            out["ceiling"] = {"value": self.ceiling, "note": self.ceiling_note}
        return out

    @classmethod
    def from_json(cls, data: Mapping | str) -> "LinearInequality":
        if isinstance(data, str):
            data = json.loads(data)
        s = as_scenario(data["scenario"])
        ceiling = data.get("ceiling")
        return cls(
            s,
            tuple((s.parse_event(t["event"]), float(t["weight"])) for t in data["terms"]),
            float(data["classical_bound"]),
            data.get("provenance", "mined"),
            data.get("citation", ""),
            None if ceiling is None else float(ceiling["value"]),
            "" if ceiling is None else ceiling.get("note", ""),
        )


def _unit(s: CausalScenario, labels: list[str]) -> tuple[tuple[Event, float], ...]:
    return tuple((s.parse_event(t), 1.0) for t in labels)


def pearl_family(l: int, m: int, n: int) -> list[LinearInequality]:
    """sum_j P(a=i, b=j | x=k(j)) <= 1 for every outcome i and map k: B -> X.

    j runs over the n outcomes of B; labels are 0-based (Pearl used 1..l).
    """
    if min(l, m, n) < 2:
        raise ValueError("cardinalities must be >= 2")
    s = instrumental(l, m, n)
    out = []
    for i in range(m):
        for k in itertools.product(range(l), repeat=n):
            terms = tuple((Event((i, j), (k[j],)), 1.0) for j in range(n))
            out.append(
                LinearInequality(
                    s, terms, 1.0, "pearl",
                    f"Pearl instrumental inequality, i={i}, k={k}; 0-based labels, j over B outcomes",
                )
            )
    return out


def _bonet() -> LinearInequality:
    s = instrumental(3, 2, 2)
    return LinearInequality(
        s, _unit(s, ["00|0", "11|0", "00|1", "10|1", "01|2"]), 2.0, "bonet",
        "Bonet (2001) second class of (3,2,2) instrumental facets; 0-based labels",
        ceiling=(3 + 2**0.5) / 2, ceiling_note="quoted quantum maximum (3+sqrt2)/2",
    )


def _c7_433() -> LinearInequality:
    s = instrumental(4, 3, 3)
    return LinearInequality(
        s, _unit(s, ["00|2", "02|3", "00|0", "12|0", "10|1", "21|1", "22|2"]), 3.0, "c7",
        "heptagon inequality of the (4,3,3) instrumental scenario",
        ceiling=3.2990, ceiling_note="quoted second-level NPA bound, not recomputed",
    )


def _inst_chsh_422() -> LinearInequality:
    s = instrumental(4, 2, 2)
    labels = ["01|2", "11|2", "10|3", "01|3", "00|0", "10|0", "11|1", "00|1"]
    return LinearInequality(
        s, _unit(s, labels), 3.0, "inst-chsh",
        "(4,2,2) instrumental inequality sharing the CHSH exclusivity graph",
    )


def _chsh_bell() -> LinearInequality:
    s = bell(2, 2, 2, 2)
    labels = ["00|00", "11|00", "00|01", "11|01", "01|10", "10|10", "00|11", "11|11"]
    return LinearInequality(
        s, _unit(s, labels), 3.0, "chsh",
        "CHSH in probability form, P(ab|xy)",
        ceiling=2 + 2**0.5, ceiling_note="Tsirelson bound 4cos^2(pi/8)",
    )


_CATALOG = {
    "bonet": _bonet,
    "c7_433": _c7_433,
    "inst_chsh_422": _inst_chsh_422,
    "chsh_bell": _chsh_bell,
}


def catalog_names() -> list[str]:
    return list(_CATALOG)


def catalog_get(name: str) -> LinearInequality:
    try:
        return _CATALOG[name]()
    except KeyError:
        raise KeyError(f"unknown inequality {name!r}; known: {', '.join(_CATALOG)}") from None


def cglmp_alpha(d: int, k: int) -> int:
    """4 when 4k+1 is a multiple of d, else 3."""
    if d < 2 or not 0 <= k < d:
        raise ValueError(f"need d >= 2 and 0 <= k < d, got d={d}, k={k}")
    return 4 if (4 * k + 1) % d == 0 else 3


def _cglmp_terms(d: int, k: int, weight: float) -> list[tuple[Event, float]]:
    terms = []
    for b in range(d):
        terms.append((Event(((b + k) % d, b), (0, 0)), weight))
    for b in range(d):
        terms.append((Event(((b + k) % d, b), (1, 1)), weight))
    for a in range(d):
        terms.append((Event((a, (a + k + 1) % d), (1, 0)), weight))
    for a in range(d):
        terms.append((Event((a, (a + k) % d), (0, 1)), weight))
    return terms


def cglmp_s(d: int, k: int) -> LinearInequality:
    bound = cglmp_alpha(d, k)
    s = bell(2, 2, d, d)
    ceilings = {(3, 0): 3.333, (3, 1): 3.333, (4, 0): 3.307, (4, 1): 3.307, (5, 0): 3.294, (5, 1): 3.999}
    return LinearInequality(
        s, tuple(_cglmp_terms(d, k, 1.0)), float(bound), "cglmp-s",
        f"CGLMP block S^{d}_{k}; sums mod d",
        ceiling=ceilings.get((d, k)),
        ceiling_note="quoted second-level NPA value" if (d, k) in ceilings else "",
    )


def cglmp_full(d: int) -> LinearInequality:
    """sum_k (d-1-k) S^d_k <= 3(d-1); zero-weight blocks are kept as terms."""
    if d < 2:
        raise ValueError("d must be >= 2")
    terms = []
    for k in range(d):
        terms.extend(_cglmp_terms(d, k, float(d - 1 - k)))
    return LinearInequality(bell(2, 2, d, d), tuple(terms), 3.0 * (d - 1), "cglmp", f"CGLMP, d={d}")


def evaluate(ineq: LinearInequality, p: Distribution | Mapping[Event, float]) -> float:
    table = p.table if isinstance(p, Distribution) else p
    total = 0.0
    for e, w in ineq.terms:
        if e not in table:
            raise MissingProbabilityError(f"no probability for event {e}")
        total += w * table[e]
    return total


def support_graph(ineq: LinearInequality) -> ExclusivityGraph:
    return build_graph(ineq.scenario, ineq.events, ineq.weights)


def resolve_inequality(spec: str) -> LinearInequality:
    """Look up an inequality by name.

    Accepts a catalog name, ``cglmp_s:d,k``, ``cglmp:d``, ``pearl:l,m,n:i``
    (the i-th member of the Pearl family), or a path to inequality JSON.
    """
    head, _, rest = spec.partition(":")
    try:
        if head == "cglmp_s":
            d, k = (int(v) for v in rest.split(","))
            return cglmp_s(d, k)
        if head == "cglmp":
            return cglmp_full(int(rest))
        if head == "pearl":
            dims, _, idx = rest.partition(":")
            l, m, n = (int(v) for v in dims.split(","))
            return pearl_family(l, m, n)[int(idx or 0)]
    except (ValueError, IndexError) as exc:
        raise ValueError(f"bad inequality spec {spec!r}: {exc}") from None
    if head in _CATALOG:
        return catalog_get(head)
    if spec.endswith(".json"):
        with open(spec, encoding="utf-8") as fh:
            return LinearInequality.from_json(fh.read())
    return catalog_get(spec)
