"""Small dense semidefinite programs.

Solves the standard-form pair

    primal:  maximize <C, X>   s.t. <A_k, X> = b_k,  X psd
    dual:    minimize b.y      s.t. Z = sum_k y_k A_k - C psd

with an infeasible primal-dual path-following method using Nesterov-Todd
scaling and a Mehrotra predictor-corrector step.  Constraint matrices are
held as sparse upper-triangle triplets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

MAX_DIMENSION = 512


class SdpDimensionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SdpProblem:
    """max <C, X> subject to <A_k, X> = b_k and X psd.

    ``rows``, ``cols``, ``vals`` and ``con`` list the upper-triangle nonzeros
    of every constraint matrix; ``con[t]`` is the constraint the t-th entry
    belongs to.
    """

    C: np.ndarray
    b: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    con: np.ndarray

    @property
    def n(self) -> int:
        return self.C.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[0]

    @classmethod
    def from_matrices(cls, C, constraints: Sequence[tuple[np.ndarray, float]]) -> "SdpProblem":
        C = np.asarray(C, dtype=float)
        n = C.shape[0]
        if C.shape != (n, n):
            raise ValueError("objective must be square")
        if not np.allclose(C, C.T, atol=1e-12, rtol=0):
            raise ValueError("objective must be symmetric")
        rows, cols, vals, con, b = [], [], [], [], []
        for k, (A, bk) in enumerate(constraints):
            A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
            if A.shape != (n, n):
                raise ValueError(f"constraint {k} has shape {A.shape}, expected {(n, n)}")
            if not np.allclose(A, A.T, atol=1e-12, rtol=0):
                raise ValueError(f"constraint {k} is not symmetric")
            i, j = np.nonzero(np.triu(A))
            rows.append(i)
            cols.append(j)
            vals.append(A[i, j])
            con.append(np.full(i.shape, k))
            b.append(float(bk))
        cat = lambda parts, dt: np.concatenate(parts).astype(dt) if parts else np.zeros(0, dt)
        return cls(
            C, np.array(b, dtype=float), cat(rows, np.int64), cat(cols, np.int64),
            cat(vals, float), cat(con, np.int64),
        )

    def constraint_matrix(self, k: int) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        sel = self.con == k
        A[self.rows[sel], self.cols[sel]] = self.vals[sel]
        return A + np.triu(A, 1).T

    def scaled(self, k: int, factor: float) -> "SdpProblem":
        vals = np.where(self.con == k, self.vals * factor, self.vals)
        b = self.b.copy()
        b[k] *= factor
        return SdpProblem(self.C, b, self.rows, self.cols, vals, self.con)

    def to_sdpa(self) -> str:
        """Sparse SDPA text (the primal here is SDPA's dual form with F0 = C)."""
        lines = [f"{self.m}", "1", f"{self.n}", " ".join(f"{v:.17g}" for v in self.b)]
        i, j = np.nonzero(np.triu(self.C))
        for a, c in zip(i.tolist(), j.tolist()):
            lines.append(f"0 1 {a + 1} {c + 1} {self.C[a, c]:.17g}")
        for k, a, c, v in zip(self.con.tolist(), self.rows.tolist(), self.cols.tolist(), self.vals.tolist()):
            lines.append(f"{k + 1} 1 {a + 1} {c + 1} {v:.17g}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class SdpSolution:
    X: np.ndarray
    y: np.ndarray
    Z: np.ndarray
    primal_objective: float
    dual_objective: float
    primal_infeasibility: float
    dual_infeasibility: float
    gap: float
    iterations: int
    status: str
    history: list = field(default_factory=list)

    @property
    def value(self) -> float:
        return self.primal_objective


class _Operators:
    """A(X), A^T(y) and the Schur complement for one problem."""

    def __init__(self, p: SdpProblem):
        self.p = p
        off = p.rows != p.cols
        # full symmetric nonzero list: both orientations of off-diagonal entries
        self.fr = np.concatenate([p.rows, p.cols[off]])
        self.fc = np.concatenate([p.cols, p.rows[off]])
        self.fv = np.concatenate([p.vals, p.vals[off]])
        self.fk = np.concatenate([p.con, p.con[off]])
        nnz = self.fr.size
        self.P = sp.csr_matrix((self.fv, (self.fk, np.arange(nnz))), shape=(p.m, nnz))
        self.dense = None
        if nnz * nnz > 8 * p.m * p.n**3 + p.m * p.m * p.n * p.n:
            self.dense = np.stack([p.constraint_matrix(k) for k in range(p.m)]) if p.m else np.zeros((0, p.n, p.n))

    def A(self, X: np.ndarray) -> np.ndarray:
        return np.bincount(self.fk, weights=self.fv * X[self.fr, self.fc], minlength=self.p.m)

    def At(self, y: np.ndarray) -> np.ndarray:
        out = np.zeros((self.p.n, self.p.n))
        np.add.at(out, (self.fr, self.fc), self.fv * y[self.fk])
        return out

    def schur(self, W: np.ndarray) -> np.ndarray:
        """M_kl = <A_k, W A_l W>."""
        m = self.p.m
        if self.dense is not None:
            WAW = W @ self.dense @ W
            return self.dense.reshape(m, -1) @ WAW.reshape(m, -1).T
        fr, fc = self.fr, self.fc
        M = np.zeros((m, m))
        nnz = fr.size
        step = max(1, 2_000_000 // max(nnz, 1))
        for lo in range(0, nnz, step):
            hi = min(nnz, lo + step)
            T = W[np.ix_(fr[lo:hi], fr)] * W[np.ix_(fc[lo:hi], fc)]
            M += self.P[:, lo:hi] @ (self.P @ T.T).T
        return M


def _min_step(L: np.ndarray, D: np.ndarray) -> float:
    """Largest alpha with L L^T + alpha D psd (inf when D is psd)."""
    Li = sla.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    S = Li @ D @ Li.T
    lam = np.linalg.eigvalsh((S + S.T) / 2)[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _default_start(p: SdpProblem, ops: _Operators):
    n = p.n
    norms = np.sqrt(np.bincount(ops.fk, weights=ops.fv**2, minlength=p.m))
    xi = max(10.0, np.sqrt(n), n * float(np.max((1 + np.abs(p.b)) / (1 + norms), initial=0)))
    eta = max(10.0, np.sqrt(n), float(np.linalg.norm(p.C)), float(np.max(norms, initial=0)))
    return xi * np.eye(n), np.zeros(p.m), eta * np.eye(n)


def solve(
    p: SdpProblem,
    tol: float = 1e-8,
    max_iter: int = 200,
    start: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
) -> SdpSolution:
    """Primal-dual interior point; deterministic for fixed input."""
    n, m = p.n, p.m
    if n > MAX_DIMENSION:
        raise SdpDimensionError(f"dimension {n} exceeds {MAX_DIMENSION}")
    if n == 0:
        return SdpSolution(np.zeros((0, 0)), np.zeros(m), np.zeros((0, 0)), 0.0, 0.0, 0.0, 0.0, 0.0, 0, "optimal")
    ops = _Operators(p)
    C, b = p.C, p.b
    if start is None:
        X, y, Z = _default_start(p, ops)
    else:
        X, y, Z = (np.array(a, dtype=float) for a in start)
    normb, normC = 1 + np.linalg.norm(b), 1 + np.linalg.norm(C)
    history = []
    gamma = 0.9
    best = None
    status = "max_iter"
    it = 0
    for it in range(max_iter + 1):
        rp = b - ops.A(X)
        Rd = ops.At(y) - Z - C
        pobj, dobj = float(np.sum(C * X)), float(b @ y)
        xz = float(np.sum(X * Z))
        pinf = float(np.linalg.norm(rp)) / normb
        dinf = float(np.linalg.norm(Rd)) / normC
        relgap = max(abs(dobj - pobj), abs(xz)) / (1 + abs(pobj) + abs(dobj))
        history.append({"primal": pobj, "dual": dobj, "pinf": pinf, "dinf": dinf, "gap": relgap})
        score = max(pinf, dinf, relgap)
        if best is None or score < best[0]:
            best = (score, X, y, Z, pobj, dobj, pinf, dinf, relgap, it)
        if pinf < tol and dinf < tol and relgap < tol:
            status = "optimal"
            break
        if np.linalg.norm(X) > 1e12 or np.linalg.norm(y) > 1e12:
            status = "infeasible"
            break
        if it == max_iter:
            break

        try:
            L = np.linalg.cholesky(X)
            LZ = np.linalg.cholesky(Z)
        except np.linalg.LinAlgError:
            status = "numerical_error"
            break
        d2, Q = np.linalg.eigh(L.T @ Z @ L)
        d = np.sqrt(np.maximum(d2, 1e-300))
        G = L @ Q / np.sqrt(d)
        Ginv = (np.sqrt(d)[:, None] * Q.T) @ sla.solve_triangular(L, np.eye(n), lower=True)
        W = G @ G.T
        mu = xz / n

        M = ops.schur(W)
        try:
            factor = sla.cho_factor(M + 1e-15 * np.trace(M) / max(m, 1) * np.eye(m))
            solveM = lambda r: sla.cho_solve(factor, r)
        except (np.linalg.LinAlgError, ValueError):
            solveM = lambda r: np.linalg.lstsq(M, r, rcond=1e-12)[0]
        WRdW = W @ Rd @ W

        def direction(Rc: np.ndarray):
            dy = solveM(ops.A(Rc - WRdW) - rp) if m else np.zeros(0)
            dZ = ops.At(dy) + Rd
            dX = Rc - W @ dZ @ W
            return (dX + dX.T) / 2, dy, (dZ + dZ.T) / 2

        # predictor
        dX, dy, dZ = direction(-X)
        ap = min(1.0, _min_step(L, dX))
        ad = min(1.0, _min_step(LZ, dZ))
        mu_aff = float(np.sum((X + ap * dX) * (Z + ad * dZ))) / n
        sigma = min(1.0, max(0.0, mu_aff / mu) ** 3)

        # corrector in the scaled space, where X and Z both map to diag(d)
        dXh = Ginv @ dX @ Ginv.T
        dZh = G.T @ dZ @ G
        H = dXh @ dZh
        R = sigma * mu * np.eye(n) - np.diag(d * d) - (H + H.T) / 2
        U = 2 * R / (d[:, None] + d[None, :])
        dX, dy, dZ = direction(G @ U @ G.T)

        ap = min(1.0, gamma * _min_step(L, dX))
        ad = min(1.0, gamma * _min_step(LZ, dZ))
        X = X + ap * dX
        X = (X + X.T) / 2
        y = y + ad * dy
        Z = Z + ad * dZ
        Z = (Z + Z.T) / 2
        gamma = 0.9 + 0.09 * min(ap, ad)

    if status != "optimal":
        _, X, y, Z, pobj, dobj, pinf, dinf, relgap, _ = best
    return SdpSolution(X, y, Z, pobj, dobj, pinf, dinf, relgap, it, status, history)
