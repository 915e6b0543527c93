"""Generator + solver sweeps written as CSV rows."""

from __future__ import annotations

import csv
import io
import itertools
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .epas import EXHAUSTIVE, solve_epas
from .exact import solve_exact
from .gen import gen_random
from .numerics import parse_rational

COLUMNS = [
    "sweep", "index", "seed", "m", "n", "p", "setting", "eps", "t",
    "colorings", "assignments", "profiles", "subroutine_calls", "motif_solves",
    "outcome", "exact_outcome", "wall_seconds",
]


@dataclass
class Sweep:
    name: str = "sweep"
    m: list[int] = None
    n: list[int] = None
    p: list[int] = None
    eps: list[str] = None
    count: int = 1
    seed: int = 0
    max_value: int = 20
    edge_density: float = 0.3
    num_types: int | None = None
    setting: str = "optional"
    connected: bool = True
    mode: str = EXHAUSTIVE
    trials: int = 100
    exact: bool = False

    @classmethod
    def from_dict(cls, raw: Mapping) -> "Sweep":
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown sweep keys: {sorted(unknown)}")
        sw = cls(**raw)
        for key in ("m", "n", "p", "eps"):
            val = getattr(sw, key)
            if val is None:
                raise ValueError(f"sweep {sw.name!r} needs {key!r}")
            if not isinstance(val, list):
                setattr(sw, key, [val])
        sw.eps = [str(e) for e in sw.eps]
        return sw


def load_config(path: str | Path) -> list[Sweep]:
    raw = json.loads(Path(path).read_text())
    if isinstance(raw, Mapping):
        raw = raw.get("sweeps", [])
    return [Sweep.from_dict(s) for s in raw]


def run_sweeps(sweeps: Iterable[Sweep], timing: bool = True) -> list[dict]:
    rows = []
    for sw in sweeps:
        idx = 0
        for m, n, p, eps in itertools.product(sw.m, sw.n, sw.p, sw.eps):
            if p > m:
                continue
            for rep in range(sw.count):
                seed = sw.seed + rep
                inst = gen_random(
                    m, n, p, sw.max_value, sw.edge_density,
                    num_types=min(sw.num_types, n) if sw.num_types else None,
                    seed=seed, setting=sw.setting, connected=sw.connected,
                )
                started = time.perf_counter()
                out = solve_epas(inst, parse_rational(eps), mode=sw.mode, trials=sw.trials, seed=seed)
                elapsed = time.perf_counter() - started
                exact = ""
                if sw.exact:
                    exact = "allocation" if solve_exact(inst) is not None else "none"
                rows.append({
                    "sweep": sw.name, "index": idx, "seed": seed, "m": m, "n": n, "p": p,
                    "setting": sw.setting, "eps": eps,
                    "t": out.params.t if out.params else "",
                    "colorings": out.stats.colorings_searched,
                    "assignments": out.stats.assignments,
                    "profiles": out.stats.profiles,
                    "subroutine_calls": out.stats.subroutine_calls,
                    "motif_solves": out.stats.motif_solves,
                    "outcome": "allocation" if out.found else "none",
                    "exact_outcome": exact,
                    "wall_seconds": f"{elapsed:.6f}" if timing else "",
                })
                idx += 1
    return rows


def to_csv(rows: list[dict], timing: bool = True) -> str:
    cols = COLUMNS if timing else [c for c in COLUMNS if c != "wall_seconds"]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
