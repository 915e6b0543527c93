"""Figures for benchmark sweeps (PNG files next to the CSV)."""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (4.5, 3.0),
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _series(rows, key):
    """Mean of ``key`` per p, one series per eps."""
    acc = defaultdict(lambda: defaultdict(list))
    for r in rows:
        val = r.get(key)
        if val in ("", None):
            continue
        acc[r["eps"]][int(r["p"])].append(float(val))
    return {
        eps: sorted((p, sum(v) / len(v)) for p, v in by_p.items())
        for eps, by_p in sorted(acc.items(), key=lambda kv: Fraction(kv[0]))
    }


def _plot(rows, key, ylabel, path: Path, log_y: bool) -> Path | None:
    series = _series(rows, key)
    if not series:
        return None
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        for eps, pts in series.items():
            xs, ys = zip(*pts)
            ax.plot(xs, ys, marker="o", label=f"eps = {eps}")
        ax.set_xlabel("p (items allocated)")
        ax.set_ylabel(ylabel)
        if log_y and all(y > 0 for pts in series.values() for _, y in pts):
            ax.set_yscale("log")
        ax.xaxis.get_major_locator().set_params(integer=True)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
    return path


def render_bench_figures(rows: list[dict], outdir: str | Path) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    made = [
        _plot(rows, "profiles", "bucket profiles searched (mean)", outdir / "profiles_vs_p.png", True),
        _plot(rows, "subroutine_calls", "subroutine calls (mean)", outdir / "calls_vs_p.png", True),
        _plot(rows, "wall_seconds", "wall time [s] (mean)", outdir / "time_vs_p.png", True),
    ]
    return [p for p in made if p is not None]
