"""Report bundles, the CGLMP table, and CSV formatting shared by the CLI."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from . import __version__
from .catalog import cglmp_s, support_graph
from .classical import alpha
from .quantum import lovasz_theta, seesaw_lower_bound

SCHEMA = 1
TABLE1_POINTS = ((3, 0), (3, 1), (4, 0), (4, 1), (5, 0), (5, 1))


@dataclass
class ReportBundle:
    command: list[str]
    results: Any
    scenario: str | None = None
    seed: int | None = None
    wall_time: float = 0.0
    version: str = __version__

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": SCHEMA,
                "command": self.command,
                "scenario": self.scenario,
                "results": self.results,
                "version": self.version,
                "seed": self.seed,
                "wall_time": self.wall_time,
            },
            sort_keys=True,
            indent=2,
            default=_plain,
        ) + "\n"


def _plain(v: Any) -> Any:
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"cannot serialise {type(v).__name__}")


def fmt(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.7g}"
    return "" if v is None else str(v)


def to_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def table1_points(max_d: int) -> list[tuple[int, int]]:
    return [(d, k) for d in range(3, max_d + 1) for k in (0, 1) if k < d]


def table1_rows(
    max_d: int = 5, with_seesaw: bool = False, seed: int = 0, restarts: int = 20, workers: int = 1
) -> list[dict]:
    """alpha, theta and optionally a see-saw value for each S^d_k block.

    The see-saw uses complex local dimension min(d, 4): the known optimal
    CGLMP measurements need complex phases.
    """
    rows = []
    for d, k in table1_points(max_d):
        ineq = cglmp_s(d, k)
        g = support_graph(ineq)
        row = {
            "d": d,
            "k": k,
            "alpha": alpha(g).value,
            "theta": lovasz_theta(g).value,
            "npa_quoted": ineq.ceiling,
        }
        if with_seesaw:
            dim = min(d, 4)
            res = seesaw_lower_bound(
                ineq, dims=(dim, dim), restarts=restarts, seed=seed, field_="complex", workers=workers
            )
            row["seesaw"] = res.value
        rows.append(row)
    return rows
