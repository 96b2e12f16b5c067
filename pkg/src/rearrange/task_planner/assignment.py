"""Minimum-cost bipartite assignment (Hungarian method, shortest augmenting paths)."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..errors import InfeasibleAssignment


def _solve(cost: list[list[float]]) -> list[int]:
    """Row -> column assignment for a finite square matrix, O(n^3) with potentials."""
    n = len(cost)
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    p = [0] * (n + 1)  # p[j]: row matched to column j (1-based, 0 = none)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [math.inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = cost[i0 - 1]
            delta = math.inf
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    rows = [0] * n
    for j in range(1, n + 1):
        rows[p[j] - 1] = j - 1
    return rows


def hungarian_assign(cost: Sequence[Sequence[float]] | np.ndarray) -> tuple[list[int], float]:
    """Minimum-cost bijection for a square matrix with entries >= 0 or +inf.

    Returns ``(assignment, total)`` where ``assignment[i]`` is the column of row i.
    Raises InfeasibleAssignment when every bijection uses an infinite entry.
    """
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {c.shape}")
    n = c.shape[0]
    if n == 0:
        return [], 0.0
    if np.any(c < 0) or np.any(np.isnan(c)):
        raise ValueError("cost entries must be >= 0 or +inf")
    finite = np.isfinite(c)
    if not finite.all():
        # any bijection using a big-M entry costs more than every all-finite one
        big = float(c[finite].sum()) + 1.0 if finite.any() else 1.0
        work = np.where(finite, c, big * (n + 1))
    else:
        work = c
    rows = _solve(work.tolist())
    if not all(finite[i, rows[i]] for i in range(n)):
        raise InfeasibleAssignment("every assignment uses an infeasible entry")
    total = 0.0
    for i in range(n):
        total += float(c[i, rows[i]])
    return rows, total


def assignment_bound(cost: np.ndarray) -> float:
    """Hungarian optimum, or +inf when no finite bijection exists."""
    if cost.shape[0] == 0:
        return 0.0
    try:
        return hungarian_assign(cost)[1]
    except InfeasibleAssignment:
        return math.inf
