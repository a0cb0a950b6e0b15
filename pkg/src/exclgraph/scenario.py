"""Single-latent causal scenarios, their event spaces, and the IV estimator.

A scenario is a DAG with observed outcome variables, parentless instrument
variables and one latent node that is a common parent of every observed
variable.  The latent is purely structural: it never carries a distribution.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

DEFAULT_LATENT = "Lambda"


class ScenarioError(ValueError):
    """Raised for malformed or unsupported scenario descriptions."""


class WeakInstrumentError(ValueError):
    """Raised when Cov(X, A) vanishes and the IV ratio is undefined."""


@dataclass(frozen=True)
class Variable:
    name: str
    card: int
    parents: tuple[str, ...] = ()


@dataclass(frozen=True, order=True)
class Event:
    """A joint assignment of every observed outcome and every instrument.

    Values are stored positionally, following the scenario's ``observed``
    and ``instruments`` order.
    """

    outcomes: tuple[int, ...]
    settings: tuple[int, ...]

    def label(self, compact: bool = True) -> str:
        sep = "" if compact else ","
        return f"{sep.join(map(str, self.outcomes))}|{sep.join(map(str, self.settings))}"

    def __str__(self) -> str:
        return self.label(compact=all(v < 10 for v in self.outcomes + self.settings))


@dataclass(frozen=True)
class CausalScenario:
    observed: tuple[Variable, ...]
    instruments: tuple[Variable, ...]
    latent: str = DEFAULT_LATENT

    def __post_init__(self) -> None:
        _validate(self)

    # -- structure -----------------------------------------------------

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        out = []
        for v in self.observed:
            out.extend((p, v.name) for p in v.parents)
            out.append((self.latent, v.name))
        return tuple(out)

    @cached_property
    def _positions(self) -> dict[str, tuple[str, int]]:
        pos: dict[str, tuple[str, int]] = {}
        for i, v in enumerate(self.observed):
            pos[v.name] = ("o", i)
        for i, v in enumerate(self.instruments):
            pos[v.name] = ("s", i)
        return pos

    def parent_slots(self, i: int) -> tuple[tuple[str, int], ...]:
        """Where the parent values of observed variable ``i`` live in an Event."""
        return tuple(self._positions[p] for p in self.observed[i].parents)

    @cached_property
    def topological_order(self) -> tuple[int, ...]:
        names = [v.name for v in self.observed]
        done: list[int] = []
        placed: set[str] = {v.name for v in self.instruments}
        while len(done) < len(names):
            for i, v in enumerate(self.observed):
                if i not in done and all(p in placed for p in v.parents):
                    done.append(i)
                    placed.add(v.name)
                    break
        return tuple(done)

    @property
    def kind(self) -> str | None:
        """'instrumental', 'bell', or None for other single-latent DAGs."""
        if len(self.observed) != 2:
            return None
        a, b = self.observed
        if len(self.instruments) == 1:
            x = self.instruments[0]
            if a.parents == (x.name,) and b.parents == (a.name,):
                return "instrumental"
        if len(self.instruments) == 2:
            x, y = self.instruments
            if a.parents == (x.name,) and b.parents == (y.name,):
                return "bell"
        return None

    # -- event space ---------------------------------------------------

    @property
    def outcome_cards(self) -> tuple[int, ...]:
        return tuple(v.card for v in self.observed)

    @property
    def setting_cards(self) -> tuple[int, ...]:
        return tuple(v.card for v in self.instruments)

    @property
    def num_events(self) -> int:
        return math.prod(self.outcome_cards) * math.prod(self.setting_cards)

    def settings_space(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(c) for c in self.setting_cards))

    def outcome_space(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(c) for c in self.outcome_cards))

    def contains(self, e: Event) -> bool:
        return (
            len(e.outcomes) == len(self.observed)
            and len(e.settings) == len(self.instruments)
            and all(0 <= v < c for v, c in zip(e.outcomes, self.outcome_cards))
            and all(0 <= v < c for v, c in zip(e.settings, self.setting_cards))
        )

    def index_of(self, e: Event) -> int:
        if not self.contains(e):
            raise ScenarioError(f"event {e} does not belong to this scenario")
        idx = 0
        for v, c in zip(e.settings + e.outcomes, self.setting_cards + self.outcome_cards):
            idx = idx * c + v
        return idx

    def event_at(self, index: int) -> Event:
        if not 0 <= index < self.num_events:
            raise IndexError(index)
        cards = self.setting_cards + self.outcome_cards
        digits = []
        for c in reversed(cards):
            index, r = divmod(index, c)
            digits.append(r)
        digits.reverse()
        m = len(self.instruments)
        return Event(tuple(digits[m:]), tuple(digits[:m]))

    def parse_event(self, text: str) -> Event:
        """Parse ``"01|2"`` or ``"0,1|2"`` into an Event of this scenario."""
        try:
            left, right = text.split("|")
        except ValueError:
            raise ScenarioError(f"bad event label {text!r}") from None

        def digits(part: str, n: int) -> tuple[int, ...]:
            part = part.strip()
            vals = part.split(",") if "," in part or n == 1 else list(part)
            if len(vals) != n:
                raise ScenarioError(f"bad event label {text!r}")
            return tuple(int(v) for v in vals)

        e = Event(digits(left, len(self.observed)), digits(right, len(self.instruments)))
        if not self.contains(e):
            raise ScenarioError(f"event {text!r} out of range")
        return e

    def event_label(self, e: Event) -> str:
        compact = max(self.outcome_cards + self.setting_cards) <= 10
        return e.label(compact)

    def as_dict(self, e: Event) -> dict[str, int]:
        d = {v.name: a for v, a in zip(self.observed, e.outcomes)}
        d.update({v.name: x for v, x in zip(self.instruments, e.settings)})
        return d

    # -- serialization -------------------------------------------------

    def to_json(self) -> dict:
        return {
            "observed": [
                {"name": v.name, "card": v.card, "parents": list(v.parents)}
                for v in self.observed
            ],
            "instruments": [{"name": v.name, "card": v.card} for v in self.instruments],
            "latent": self.latent,
        }

    def serialize(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def shorthand(self) -> str | None:
        """Shorthand form when the scenario matches a canonical shape."""
        canon = None
        if self.kind == "instrumental":
            x, (a, b) = self.instruments[0], self.observed
            canon = instrumental(x.card, a.card, b.card)
            text = f"instrumental:{x.card},{a.card},{b.card}"
        elif self.kind == "bell":
            (x, y), (a, b) = self.instruments, self.observed
            canon = bell(x.card, y.card, a.card, b.card)
            text = f"bell:{x.card},{y.card},{a.card},{b.card}"
        return text if canon == self else None


def _validate(s: CausalScenario) -> None:
    names = [v.name for v in s.observed] + [v.name for v in s.instruments]
    if not s.observed:
        raise ScenarioError("scenario needs at least one observed variable")
    if len(set(names)) != len(names) or s.latent in names:
        raise ScenarioError("variable names must be unique")
    for v in s.observed + s.instruments:
        if v.card < 2:
            raise ScenarioError(f"cardinality of {v.name} must be >= 2, got {v.card}")
    for v in s.instruments:
        if v.parents:
            raise ScenarioError(f"instrument {v.name} must not have parents")
    observed = {v.name for v in s.observed}
    for v in s.observed:
        for p in v.parents:
            if p == s.latent:
                raise ScenarioError("latent edges are implicit; do not list the latent as a parent")
            if p not in names:
                raise ScenarioError(f"unknown parent {p!r} of {v.name}")
            if p == v.name:
                raise ScenarioError(f"cycle detected at {v.name}")
        if len(set(v.parents)) != len(v.parents):
            raise ScenarioError(f"duplicate parent of {v.name}")
    # Kahn's algorithm over the observed sub-DAG
    indeg = {v.name: sum(p in observed for p in v.parents) for v in s.observed}
    children: dict[str, list[str]] = {n: [] for n in observed}
    for v in s.observed:
        for p in v.parents:
            if p in observed:
                children[p].append(v.name)
    ready = [n for n, d in indeg.items() if d == 0]
    seen = 0
    while ready:
        n = ready.pop()
        seen += 1
        for c in children[n]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    if seen != len(observed):
        raise ScenarioError("cycle detected among observed variables")


def instrumental(l: int, m: int, n: int) -> CausalScenario:
    """X -> A -> B with the latent feeding A and B."""
    return CausalScenario(
        observed=(Variable("A", m, ("X",)), Variable("B", n, ("A",))),
        instruments=(Variable("X", l),),
    )


def bell(lx: int, ly: int, m: int, n: int) -> CausalScenario:
    """X -> A, Y -> B with the latent feeding A and B."""
    return CausalScenario(
        observed=(Variable("A", m, ("X",)), Variable("B", n, ("Y",))),
        instruments=(Variable("X", lx), Variable("Y", ly)),
    )


def _ints(body: str, text: str) -> list[int]:
    try:
        return [int(t) for t in body.split(",")]
    except ValueError:
        raise ScenarioError(f"bad scenario shorthand {text!r}") from None


def parse_scenario(spec: str | Mapping) -> CausalScenario:
    """Build a validated scenario from shorthand, JSON text, or a parsed dict.

    Shorthands: ``instrumental:l,m,n``, ``bell:lx,ly,m,n`` and
    ``bell:l,m,n`` (both parties share ``l`` settings).
    """
    if isinstance(spec, str):
        text = spec.strip()
        if text.startswith("instrumental:"):
            vals = _ints(text.split(":", 1)[1], text)
            if len(vals) != 3:
                raise ScenarioError("instrumental shorthand takes l,m,n")
            return _checked(instrumental, *vals)
        if text.startswith("bell:"):
            vals = _ints(text.split(":", 1)[1], text)
            if len(vals) == 3:
                vals = [vals[0], vals[0], vals[1], vals[2]]
            if len(vals) != 4:
                raise ScenarioError("bell shorthand takes lx,ly,m,n")
            return _checked(bell, *vals)
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"cannot parse scenario: {exc}") from None
        return parse_scenario(data)

    data = dict(spec)
    latent = data.get("latent", DEFAULT_LATENT)
    if isinstance(latent, list):
        if len(latent) != 1:
            raise ScenarioError("exactly one latent variable is supported")
        latent = latent[0]
    if "edges" in data:
        raise ScenarioError("give parents per observed variable instead of an edge list")
    try:
        observed = tuple(
            Variable(str(o["name"]), int(o["card"]), tuple(o.get("parents", ())))
            for o in data["observed"]
        )
        instruments = tuple(
            Variable(str(x["name"]), int(x["card"]), tuple(x.get("parents", ())))
            for x in data.get("instruments", ())
        )
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from None
    return CausalScenario(observed, instruments, str(latent))


def _checked(ctor, *vals: int) -> CausalScenario:
    if any(v < 2 for v in vals):
        raise ScenarioError(f"cardinalities must be >= 2, got {vals}")
    return ctor(*vals)


def as_scenario(s: str | Mapping | CausalScenario) -> CausalScenario:
    return s if isinstance(s, CausalScenario) else parse_scenario(s)


def enumerate_events(s: CausalScenario) -> list[Event]:
    """All events, settings outer and outcomes inner, lexicographic."""
    return [Event(a, x) for x in s.settings_space() for a in s.outcome_space()]


@dataclass(frozen=True)
class Distribution:
    """Conditional probabilities p(a|x) keyed by Event."""

    scenario: CausalScenario
    table: Mapping[Event, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        totals: dict[tuple[int, ...], float] = {}
        for e, p in self.table.items():
            if not self.scenario.contains(e):
                raise ScenarioError(f"event {e} outside scenario")
            if p < 0 or not math.isfinite(p):
                raise ScenarioError(f"bad probability {p} for {e}")
            totals[e.settings] = totals.get(e.settings, 0.0) + p
        for x in self.scenario.settings_space():
            if abs(totals.get(x, 0.0) - 1.0) > 1e-9:
                raise ScenarioError(f"probabilities for setting {x} sum to {totals.get(x, 0.0)}")

    def __getitem__(self, e: Event) -> float:
        return self.table.get(e, 0.0)

    @classmethod
    def uniform(cls, s: CausalScenario) -> "Distribution":
        p = 1.0 / math.prod(s.outcome_cards)
        return cls(s, {e: p for e in enumerate_events(s)})


def estimate_iv_strength(samples: Iterable[Sequence[float]]) -> float:
    """Linear IV estimate gamma = Cov(X, B) / Cov(X, A) from (x, a, b) rows."""
    arr = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError("samples must be (x, a, b) triples")
    if arr.shape[0] < 2:
        raise ValueError("need at least two samples")
    x, a, b = arr.T
    cov = np.cov(np.vstack([x, a, b]))
    if abs(cov[0, 1]) <= 1e-12:
        raise WeakInstrumentError("Cov(X, A) is zero: weak instrument")
    return float(cov[0, 2] / cov[0, 1])


def synthetic_iv_samples(gamma: float, n: int, seed: int, strength: float = 1.0) -> np.ndarray:
    """Draw (x, a, b) rows from a linear model with a confounder u.

    a = strength * x + u + noise and b = gamma * a + u + noise, with x
    independent of u, so Cov(X, B) / Cov(X, A) = gamma in expectation.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    u = rng.standard_normal(n)
    a = strength * x + u + rng.standard_normal(n)
    b = gamma * a + u + rng.standard_normal(n)
    return np.column_stack([x, a, b])
