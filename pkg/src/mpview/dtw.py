"""Dynamic time warping with path backtracking, absolute-difference cost."""
from __future__ import annotations

import numpy as np

from .errors import EmptySequence

# backtrack preference on cost ties: diagonal, then up (i-1), then left (j-1)
_TIE_ORDER = ((-1, -1), (-1, 0), (0, -1))


def dtw(a, b) -> tuple[float, list[tuple[int, int]]]:
    """Minimal accumulated |a_i - b_j| over monotone warp paths.

    Returns (distance, path); the path runs from (0, 0) to
    (len(a)-1, len(b)-1) and each step advances i, j, or both by one.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise EmptySequence("dtw requires two nonempty sequences")
    cost = np.abs(a[:, None] - b[None, :])
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        row = acc[i]
        prev = acc[i - 1]
        for j in range(1, m + 1):
            row[j] = cost[i - 1, j - 1] + min(prev[j - 1], prev[j], row[j - 1])
    path = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while (i, j) != (0, 0):
        best = None
        best_val = np.inf
        for di, dj in _TIE_ORDER:
            pi, pj = i + di, j + dj
            if pi < 0 or pj < 0:
                continue
            if acc[pi + 1, pj + 1] < best_val:
                best_val = acc[pi + 1, pj + 1]
                best = (pi, pj)
        i, j = best
        path.append((i, j))
    path.reverse()
    return float(acc[n, m]), path
