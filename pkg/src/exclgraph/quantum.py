"""Quantum bounds: Lovasz theta from above, see-saw over explicit strategies from below.

Instrumental strategies follow the causal order: the first subsystem is
measured with setting x, and the outcome a selects the measurement on the
second subsystem, p(ab|x) = <psi| M^x_a (x) N^a_b |psi>.  Bell strategies use
p(ab|xy) = <psi| M^x_a (x) N^y_b |psi>.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .catalog import LinearInequality, evaluate, support_graph
from .classical import DeterministicStrategy, StrategyCapExceeded, best_strategy
from .graph import ExclusivityGraph
from .scenario import CausalScenario, Distribution, Event, enumerate_events
from .sdp import SdpProblem, SdpSolution, solve

MAX_LOCAL_DIM = 4
_MASK64 = (1 << 64) - 1


class StrategyShapeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ThetaResult:
    value: float
    psd_witness: np.ndarray
    solution: SdpSolution

    def labelling(self, tol: float = 1e-9) -> np.ndarray:
        """Rows u_i with u_i . u_j = B_ij, from the eigendecomposition of the witness."""
        lam, V = np.linalg.eigh(self.psd_witness)
        keep = lam > tol * max(lam.max(initial=0), 1)
        return V[:, keep] * np.sqrt(lam[keep])


def theta_problem(g: ExclusivityGraph) -> SdpProblem:
    n = g.n
    sw = np.sqrt(g.weights)
    cons = [(np.eye(n), 1.0)]
    for i, j in g.edges():
        A = np.zeros((n, n))
        A[i, j] = A[j, i] = 0.5
        cons.append((A, 0.0))
    return SdpProblem.from_matrices(np.outer(sw, sw), cons)


def lovasz_theta(g: ExclusivityGraph, tol: float = 1e-9, max_iter: int = 200) -> ThetaResult:
    """Weighted theta: max sum_ij sqrt(w_i w_j) B_ij, tr B = 1, B_ij = 0 on edges, B psd."""
    n = g.n
    if n == 0:
        sol = solve(SdpProblem.from_matrices(np.zeros((0, 0)), []))
        return ThetaResult(0.0, np.zeros((0, 0)), sol)
    p = theta_problem(g)
    # strictly feasible start: B = I/n and Z = t I - sqrt(w) sqrt(w)^T with t > sum(w)
    t = 1.0 + 1.1 * float(g.weights.sum())
    y0 = np.zeros(p.m)
    y0[0] = t
    start = (np.eye(n) / n, y0, t * np.eye(n) - p.C)
    sol = solve(p, tol=tol, max_iter=max_iter, start=start)
    if sol.status != "optimal":
        raise RuntimeError(
            f"theta SDP did not converge: status={sol.status}, pinf={sol.primal_infeasibility:.2e}, "
            f"dinf={sol.dual_infeasibility:.2e}, gap={sol.gap:.2e}"
        )
    return ThetaResult(sol.primal_objective, sol.X, sol)


def theta_cycle_formula(n: int) -> float:
    """Closed-form theta of the odd cycle C_n."""
    if n < 5 or n % 2 == 0:
        raise ValueError(f"n must be odd and >= 5, got {n}")
    c = math.cos(math.pi / n)
    return n * c / (1 + c)


# -- strategies -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuantumStrategy:
    """State on C^{d1} (x) C^{d2} plus projective measurements per context.

    ``alice[c][a]`` is the projector for outcome ``a`` in Alice's context ``c``
    (her setting x); ``bob[c][b]`` likewise, where Bob's context is Alice's
    outcome a (instrumental) or his own setting y (Bell).
    """

    kind: str
    dims: tuple[int, int]
    state: np.ndarray
    alice: tuple[tuple[np.ndarray, ...], ...]
    bob: tuple[tuple[np.ndarray, ...], ...]

    def check(self, tol: float = 1e-9) -> None:
        d1, d2 = self.dims
        if self.state.shape != (d1 * d2,):
            raise StrategyShapeError("state has wrong dimension")
        if abs(np.linalg.norm(self.state) - 1) > 1e-10:
            raise StrategyShapeError("state is not normalised")
        for side, d in ((self.alice, d1), (self.bob, d2)):
            for ctx in side:
                total = np.zeros((d, d), dtype=self.state.dtype)
                for i, E in enumerate(ctx):
                    if E.shape != (d, d):
                        raise StrategyShapeError("projector has wrong dimension")
                    if np.linalg.norm(E @ E - E) > tol:
                        raise StrategyShapeError("measurement element is not a projector")
                    for F in ctx[i + 1:]:
                        if np.linalg.norm(E @ F) > tol:
                            raise StrategyShapeError("projectors in a context are not orthogonal")
                    total = total + E
                if np.linalg.norm(total - np.eye(d)) > tol:
                    raise StrategyShapeError("projectors do not sum to identity")

    def to_json(self) -> dict:
        def enc(a: np.ndarray):
            if np.iscomplexobj(a):
                return [[v.real, v.imag] for v in np.ravel(a)]
            return np.ravel(a).tolist()

        return {
            "kind": self.kind,
            "dims": list(self.dims),
            "field": "complex" if np.iscomplexobj(self.state) else "real",
            "state": enc(self.state),
            "alice": [[enc(E) for E in ctx] for ctx in self.alice],
            "bob": [[enc(E) for E in ctx] for ctx in self.bob],
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "QuantumStrategy":
        if isinstance(data, str):
            data = json.loads(data)
        d1, d2 = data["dims"]
        cplx = data.get("field") == "complex"

        def dec(v, shape):
            a = np.array(v, dtype=float)
            if cplx:
                a = a[:, 0] + 1j * a[:, 1]
            return a.reshape(shape)

        return cls(
            data["kind"], (d1, d2), dec(data["state"], (d1 * d2,)),
            tuple(tuple(dec(E, (d1, d1)) for E in ctx) for ctx in data["alice"]),
            tuple(tuple(dec(E, (d2, d2)) for E in ctx) for ctx in data["bob"]),
        )


def _contexts(s: CausalScenario) -> tuple[int, int, int, int]:
    """(Alice contexts, Alice outcomes, Bob contexts, Bob outcomes)."""
    kind = s.kind
    a, b = s.observed
    if kind == "instrumental":
        return s.instruments[0].card, a.card, a.card, b.card
    if kind == "bell":
        return s.instruments[0].card, a.card, s.instruments[1].card, b.card
    raise StrategyShapeError("quantum strategies need an instrumental or Bell scenario")


def _slots(s: CausalScenario, e: Event) -> tuple[int, int, int, int]:
    """(Alice context, a, Bob context, b) of an event."""
    a, b = e.outcomes
    x = e.settings[0]
    return (x, a, a, b) if s.kind == "instrumental" else (x, a, e.settings[1], b)


def _check_shape(st: QuantumStrategy, s: CausalScenario) -> None:
    ca, na, cb, nb = _contexts(s)
    if st.kind != s.kind:
        raise StrategyShapeError(f"strategy is {st.kind}, scenario is {s.kind}")
    if len(st.alice) != ca or any(len(c) != na for c in st.alice):
        raise StrategyShapeError("Alice's measurements do not match the scenario")
    if len(st.bob) != cb or any(len(c) != nb for c in st.bob):
        raise StrategyShapeError("Bob's measurements do not match the scenario")


def born_probabilities(st: QuantumStrategy, s: CausalScenario) -> Distribution:
    _check_shape(st, s)
    st.check()
    psi = st.state
    table = {}
    for e in enumerate_events(s):
        xa, a, xb, b = _slots(s, e)
        op = np.kron(st.alice[xa][a], st.bob[xb][b])
        table[e] = max(0.0, float(np.real(np.vdot(psi, op @ psi))))
    return Distribution(s, table)


def quantum_value(ineq: LinearInequality, st: QuantumStrategy) -> float:
    return evaluate(ineq, born_probabilities(st, ineq.scenario))


def from_deterministic(
    det: DeterministicStrategy, s: CausalScenario, dims: tuple[int, int], dtype=float
) -> QuantumStrategy:
    """Embed a deterministic strategy: the chosen outcome's projector is the identity."""
    ca, na, cb, nb = _contexts(s)
    d1, d2 = dims
    fa, fb = det.responses

    def block(d: int, n_out: int, pick: int) -> tuple[np.ndarray, ...]:
        return tuple((np.eye(d) if o == pick else np.zeros((d, d))).astype(dtype) for o in range(n_out))

    state = np.zeros(d1 * d2, dtype=dtype)
    state[0] = 1.0
    return QuantumStrategy(
        s.kind, dims, state,
        tuple(block(d1, na, fa[c]) for c in range(ca)),
        tuple(block(d2, nb, fb[c]) for c in range(cb)),
    )


# -- see-saw ----------------------------------------------------------------


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def restart_seeds(seed: int, count: int) -> list[int]:
    out, state = [], seed & _MASK64
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        out.append(splitmix64(state))
    return out


@dataclass
class RestartTrace:
    index: int
    seed: int | None
    value: float
    sweeps: int
    trace: list[float] = field(default_factory=list)


@dataclass(eq=False)
class SeesawResult:
    value: float
    strategy: QuantumStrategy
    restarts: list[RestartTrace]
    best_restart: int


def _random_pvm(rng: np.random.Generator, d: int, n_out: int, cplx: bool) -> list[np.ndarray]:
    A = rng.standard_normal((d, d))
    if cplx:
        A = A + 1j * rng.standard_normal((d, d))
    U, _ = np.linalg.qr(A)
    owner = rng.integers(n_out, size=d)
    return [
        (U[:, owner == o] @ U[:, owner == o].conj().T) for o in range(n_out)
    ]


def _best_pvm(Ks: list[np.ndarray], current: list[np.ndarray]) -> list[np.ndarray]:
    """Projective measurement maximising sum_o tr(E_o K_o), never worse than ``current``.

    Two outcomes: exact, E_0 projects onto the positive eigenspace of K_0 - K_1.
    More outcomes: alternate between assigning eigenbasis vectors to outcomes
    and a polar-decomposition ascent step on the basis.
    """
    d = Ks[0].shape[0]
    obj = lambda Es: float(sum(np.real(np.trace(E @ K)) for E, K in zip(Es, Ks)))
    base = obj(current)
    if len(Ks) == 2:
        lam, V = np.linalg.eigh(Ks[0] - Ks[1])
        P = V[:, lam > 0]
        E0 = P @ P.conj().T
        new = [E0, np.eye(d, dtype=E0.dtype) - E0]
    else:
        new = _pvm_ascent(Ks, current)
    return new if obj(new) >= base else current


def _pvm_ascent(Ks: list[np.ndarray], current: list[np.ndarray], iters: int = 200) -> list[np.ndarray]:
    d = Ks[0].shape[0]
    cols, owner = [], []
    for o, E in enumerate(current):
        lam, V = np.linalg.eigh(E)
        for k in np.flatnonzero(lam > 0.5):
            cols.append(V[:, k])
            owner.append(o)
    U = np.stack(cols, axis=1)
    owner = np.array(owner)
    shift = max(0.0, -min(np.linalg.eigvalsh(K)[0] for K in Ks)) + 1.0
    Kp = [K + shift * np.eye(d) for K in Ks]
    prev = -np.inf
    for _ in range(iters):
        scores = np.array([[np.real(np.vdot(U[:, j], K @ U[:, j])) for K in Kp] for j in range(d)])
        owner = np.argmax(scores, axis=1)
        G = np.stack([Kp[owner[j]] @ U[:, j] for j in range(d)], axis=1)
        P, _, Vh = np.linalg.svd(G)
        U = P @ Vh
        val = sum(np.real(np.vdot(U[:, j], Kp[owner[j]] @ U[:, j])) for j in range(d))
        if val - prev < 1e-13 * max(1.0, abs(val)):
            break
        prev = val
    scores = np.array([[np.real(np.vdot(U[:, j], K @ U[:, j])) for K in Kp] for j in range(d)])
    owner = np.argmax(scores, axis=1)
    return [U[:, owner == o] @ U[:, owner == o].conj().T for o in range(len(Ks))]


class _Seesaw:
    def __init__(self, ineq: LinearInequality, dims: tuple[int, int], cplx: bool):
        self.s = ineq.scenario
        self.dims = dims
        self.cplx = cplx
        self.ca, self.na, self.cb, self.nb = _contexts(self.s)
        self.terms = [(_slots(self.s, e), w) for e, w in ineq.terms]

    def operator(self, A, B) -> np.ndarray:
        d1, d2 = self.dims
        op = np.zeros((d1 * d2, d1 * d2), dtype=complex if self.cplx else float)
        for (xa, a, xb, b), w in self.terms:
            op += w * np.kron(A[xa][a], B[xb][b])
        return op

    def top_state(self, A, B) -> tuple[np.ndarray, float]:
        op = self.operator(A, B)
        lam, V = np.linalg.eigh((op + op.conj().T) / 2)
        psi = V[:, -1]
        # fix the global phase so the largest entry is real and positive
        k = int(np.argmax(np.abs(psi)))
        psi = psi * (np.abs(psi[k]) / psi[k])
        return (psi if self.cplx else np.real(psi)), float(lam[-1])

    def value(self, psi, A, B) -> float:
        return float(np.real(np.vdot(psi, self.operator(A, B) @ psi)))

    def run(self, A, B, max_sweeps: int, rel_tol: float) -> tuple[np.ndarray, list, list, list[float], int]:
        d1, d2 = self.dims
        psi, val = self.top_state(A, B)
        trace = [val]
        sweeps = 0
        for sweeps in range(1, max_sweeps + 1):
            start = trace[-1]
            R = np.outer(psi, psi.conj()).reshape(d1, d2, d1, d2)
            for c in range(self.ca):
                Ks = [np.zeros((d1, d1), dtype=R.dtype) for _ in range(self.na)]
                for (xa, a, xb, b), w in self.terms:
                    if xa == c:
                        # K[k, i] = sum_{j,l} N[j, l] R[k, l, i, j]
                        Ks[a] += w * np.einsum("jl,klij->ki", B[xb][b], R)
                A[c] = _best_pvm(Ks, A[c])
            trace.append(self.value(psi, A, B))
            for c in range(self.cb):
                Ks = [np.zeros((d2, d2), dtype=R.dtype) for _ in range(self.nb)]
                for (xa, a, xb, b), w in self.terms:
                    if xb == c:
                        Ks[b] += w * np.einsum("ik,klij->lj", A[xa][a], R)
                B[c] = _best_pvm(Ks, B[c])
            trace.append(self.value(psi, A, B))
            psi, val = self.top_state(A, B)
            trace.append(val)
            if val - start <= rel_tol * max(1.0, abs(val)):
                break
        return psi, A, B, trace, sweeps


def seesaw_lower_bound(
    ineq: LinearInequality,
    dims: tuple[int, int] = (2, 2),
    restarts: int = 50,
    seed: int = 0,
    max_sweeps: int = 500,
    rel_tol: float = 1e-10,
    field_: str = "real",
    workers: int = 1,
) -> SeesawResult:
    """Best quantum value found by alternating state and measurement updates.

    Restart 0 starts from an optimal deterministic strategy (when the
    strategy count is enumerable), so the result never falls below the
    classical maximum.  The remaining restarts draw random orthonormal bases
    from per-restart seeds derived from ``seed``.
    """
    s = ineq.scenario
    _contexts(s)
    if any(d < 1 or d > MAX_LOCAL_DIM for d in dims):
        raise ValueError(f"local dimensions must be in 1..{MAX_LOCAL_DIM}, got {dims}")
    cplx = field_ == "complex"
    dtype = complex if cplx else float
    engine = _Seesaw(ineq, tuple(dims), cplx)
    seeds = restart_seeds(seed, restarts)

    det = None
    try:
        det = best_strategy(ineq)[1]
    except StrategyCapExceeded:
        pass

    def one(idx: int) -> tuple[RestartTrace, QuantumStrategy]:
        if idx == 0 and det is not None:
            st = from_deterministic(det, s, tuple(dims), dtype)
            A = [list(c) for c in st.alice]
            B = [list(c) for c in st.bob]
            rseed = None
        else:
            rseed = seeds[idx]
            rng = np.random.default_rng(rseed)
            A = [_random_pvm(rng, dims[0], engine.na, cplx) for _ in range(engine.ca)]
            B = [_random_pvm(rng, dims[1], engine.nb, cplx) for _ in range(engine.cb)]
        psi, A, B, trace, sweeps = engine.run(A, B, max_sweeps, rel_tol)
        st = QuantumStrategy(
            s.kind, tuple(dims), psi / np.linalg.norm(psi),
            tuple(tuple(_clean(E) for E in c) for c in A),
            tuple(tuple(_clean(E) for E in c) for c in B),
        )
        return RestartTrace(idx, rseed, trace[-1], sweeps, trace), st

    idxs = list(range(max(restarts, 1)))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            runs = list(pool.map(one, idxs))
    else:
        runs = [one(i) for i in idxs]
    best = 0
    for i, (tr, _) in enumerate(runs):
        if tr.value > runs[best][0].value:
            best = i
    st = runs[best][1]
    return SeesawResult(quantum_value(ineq, st), st, [r for r, _ in runs], best)


def _clean(E: np.ndarray) -> np.ndarray:
    """Re-project onto an exact projector to shed rounding drift."""
    lam, V = np.linalg.eigh((E + E.conj().T) / 2)
    P = V[:, lam > 0.5]
    return P @ P.conj().T


def tsirelson_strategy() -> QuantumStrategy:
    """Maximally entangled real qubits with the optimal CHSH angles."""
    def basis(theta: float) -> tuple[np.ndarray, np.ndarray]:
        v0 = np.array([math.cos(theta), math.sin(theta)])
        v1 = np.array([-math.sin(theta), math.cos(theta)])
        return np.outer(v0, v0), np.outer(v1, v1)

    state = np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2)
    alice = (basis(0.0), basis(-math.pi / 4))
    bob = (basis(math.pi / 8), basis(-math.pi / 8))
    return QuantumStrategy("bell", (2, 2), state, alice, bob)
