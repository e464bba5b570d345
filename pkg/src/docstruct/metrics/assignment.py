"""Minimum-cost assignment (Hungarian matching) with optional unmatched costs."""
from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment


def hungarian(
    cost,
    row_unmatched: Sequence[float] | None = None,
    col_unmatched: Sequence[float] | None = None,
) -> tuple[list[tuple[int, int]], float]:
    """Return ``(pairs, total)`` minimising total cost.

    Without unmatched costs this is the usual rectangular assignment
    (``min(p, g)`` pairs). With them, every row and column may also stay
    unmatched at its given price, and only pairs that beat that are kept.
    """
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2:
        c = c.reshape(len(row_unmatched or ()), len(col_unmatched or ()))
    p, g = c.shape
    if row_unmatched is None and col_unmatched is None:
        if p == 0 or g == 0:
            return [], 0.0
        rows, cols = linear_sum_assignment(c)
        pairs = [(int(r), int(k)) for r, k in zip(rows, cols)]
        return pairs, float(c[rows, cols].sum())

    ru = np.asarray(row_unmatched if row_unmatched is not None else np.zeros(p), dtype=float)
    cu = np.asarray(col_unmatched if col_unmatched is not None else np.zeros(g), dtype=float)
    big = float(c.sum() + ru.sum() + cu.sum() + 1.0)
    n = p + g
    if n == 0:
        return [], 0.0
    full = np.full((n, n), big)
    full[:p, :g] = c
    full[:p, g:] = np.where(np.eye(p, dtype=bool), ru[:, None], big)
    full[p:, :g] = np.where(np.eye(g, dtype=bool), cu[None, :], big)
    full[p:, g:] = 0.0
    rows, cols = linear_sum_assignment(full)
    pairs = [(int(r), int(k)) for r, k in zip(rows, cols) if r < p and k < g]
    return pairs, float(full[rows, cols].sum())
