"""Tables behind the reproducible figures; CSV/JSON only, no plotting.

Each builder returns a :class:`Table` whose rows are computed cell by cell.
Cells may be evaluated on a thread pool (size from ``MMSE_KL_THREADS``), but
rows are assembled in grid order so the output never depends on the pool.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bounds import mmse_bounds
from .divergences import BallChannelSpec, GGChannelSpec, gg_crb, gg_lower_bound, mult_channel_bounds
from .errors import DomainError
from .gaussian import correlated_signal_reference
from .lambertw import omega

FIGURE_IDS = (1, 2, 5, 6, 7, 8)
SIG_DIGITS = 12

FIG1_T = np.round(np.arange(101) * 0.05, 10)
FIG2_EPS = np.round(np.arange(51) * 0.1, 10)
FIG56_LOG2 = np.linspace(-2.0, 5.0, 29)
FIG7_K = np.arange(1, 101)
FIG7_CENTER, FIG7_RADIUS = 10.0, 2.0
FIG8_C = np.linspace(1.5, 10.0, 64)
FIG8_K, FIG8_RADIUS = 2, 1.0


@dataclass(frozen=True)
class Table:
    columns: tuple
    rows: tuple
    note: str = ""

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows], dtype=float)

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        lines.extend(",".join(format_value(v) for v in row) for row in self.rows)
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        records = [{c: _json_value(v) for c, v in zip(self.columns, row)} for row in self.rows]
        payload = {"columns": list(self.columns), "rows": records}
        if self.note:
            payload["note"] = self.note
        return json.dumps(payload, indent=1) + "\n"


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.{SIG_DIGITS}g}"


def _json_value(v):
    if v is None or isinstance(v, (int, np.integer)):
        return None if v is None else int(v)
    return float(format_value(v))


def thread_count() -> int:
    raw = os.environ.get("MMSE_KL_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"MMSE_KL_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise DomainError(f"MMSE_KL_THREADS must be a positive integer, got {raw!r}")
    return n


def ordered_map(func: Callable, items: Sequence, threads: int | None = None) -> list:
    """``[func(x) for x in items]``, optionally on a thread pool; order is preserved."""
    threads = thread_count() if threads is None else threads
    if threads <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def fig1(threads=None) -> Table:
    """``omega_0`` and ``omega_-1`` on t in [0, 5]."""
    rows = ordered_map(lambda t: (float(t), omega(0, t), omega(-1, t)), FIG1_T, threads)
    return Table(("t", "omega0", "omega_minus1"), tuple(rows))


def fig2(threads=None) -> Table:
    """Minimax MMSE (upper bound) over the joint KL ball, correlated signal at 0 dB."""
    ref = correlated_signal_reference(k=10, snr_db=0.0)

    def cell(eps):
        res = mmse_bounds(ref, float(eps))
        return (float(eps), res.upper, res.lower, res.reference_mmse, None)

    rows = ordered_map(cell, FIG2_EPS, threads)
    return Table(
        ("epsilon", "minimax_mmse_joint", "lower_joint", "reference_mmse", "input_only"),
        tuple(rows),
        note="input_only is left empty: that curve needs a bound outside this package",
    )


def gg_grid_table(threads=None) -> Table:
    """Proposed lower bound and CRB on the (log2 p, log2 q) grid, unit variances (0 dB)."""
    cells = [(lp, lq) for lp in FIG56_LOG2 for lq in FIG56_LOG2]

    def cell(c):
        lp, lq = c
        p, q = 2.0 ** lp, 2.0 ** lq
        spec = GGChannelSpec.from_variances(1.0, p, 1.0, q)
        lower, crb = gg_lower_bound(spec), gg_crb(spec)
        return (float(lp), float(lq), p, q, lower, crb, lower - crb)

    rows = ordered_map(cell, cells, threads)
    return Table(("log2_p", "log2_q", "p", "q", "lower", "crb", "difference"), tuple(rows))


def fig7(threads=None) -> Table:
    """Multiplicative channel bounds against K with c_k = 10, r = 2."""

    def cell(k):
        spec = BallChannelSpec(FIG7_CENTER, FIG7_RADIUS, int(k))
        lower, upper = mult_channel_bounds(spec, "exact")
        approx, _ = mult_channel_bounds(spec, "affine_bound")
        return (int(k), lower, upper, approx)

    rows = ordered_map(cell, FIG7_K, threads)
    return Table(("k", "lower", "upper", "approx_lower"), tuple(rows))


def fig8(threads=None) -> Table:
    """Multiplicative channel lower bound over centers (c1, c2), K = 2, r = 1."""
    cells = [(c1, c2) for c1 in FIG8_C for c2 in FIG8_C]

    def cell(c):
        spec = BallChannelSpec(np.array(c), FIG8_RADIUS, FIG8_K)
        lower, upper = mult_channel_bounds(spec, "exact")
        return (float(c[0]), float(c[1]), lower, upper)

    rows = ordered_map(cell, cells, threads)
    return Table(("c1", "c2", "lower", "upper"), tuple(rows))


BUILDERS = {1: fig1, 2: fig2, 5: gg_grid_table, 6: gg_grid_table, 7: fig7, 8: fig8}


def build(figure_id: int, threads=None) -> Table:
    if figure_id not in BUILDERS:
        raise DomainError(f"unsupported figure id {figure_id!r}; choose from {', '.join(map(str, FIGURE_IDS))}")
    return BUILDERS[figure_id](threads)


def negative_region(table: Table) -> dict:
    """Bounding box and connectivity of the cells where the proposed bound is below the CRB."""
    lp, lq, diff = table.column("log2_p"), table.column("log2_q"), table.column("difference")
    neg = diff < 0.0
    if not neg.any():
        return {"cells": 0, "connected": True, "box": None}
    axis = np.unique(lp)
    n = axis.size
    grid = neg.reshape(n, n)
    # flood fill from one negative cell, 4-neighbour connectivity
    start = tuple(np.argwhere(grid)[0])
    seen = {start}
    stack = [start]
    while stack:
        i, j = stack.pop()
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            a, b = i + di, j + dj
            if 0 <= a < n and 0 <= b < n and grid[a, b] and (a, b) not in seen:
                seen.add((a, b))
                stack.append((a, b))
    box = (float(lp[neg].min()), float(lp[neg].max()), float(lq[neg].min()), float(lq[neg].max()))
    return {"cells": int(neg.sum()), "connected": len(seen) == int(neg.sum()), "box": box}


def scalar_lfd_panels(eps_values=(0.0, 0.5, 5.0), snr_db: float = 3.0) -> Table:
    """Least-favorable covariance entries for the scalar channel at the given SNR."""
    from .gaussian import least_favorable_cov

    ref = correlated_signal_reference(k=1, snr_db=snr_db)
    rows = []
    for eps in eps_values:
        res = mmse_bounds(ref, float(eps))
        cov = least_favorable_cov(ref, res.gamma_minus)
        rho = cov[0, 1] / math.sqrt(cov[0, 0] * cov[1, 1])
        rows.append((float(eps), res.gamma_minus, cov[0, 0], cov[0, 1], cov[1, 1], rho, res.upper))
    return Table(("epsilon", "gamma_minus", "var_x", "cov_xy", "var_y", "correlation", "upper"), tuple(rows))
