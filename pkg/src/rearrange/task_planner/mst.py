"""Prim's minimum spanning tree on small dense graphs."""
from __future__ import annotations

import math

import numpy as np


def prim_mst_weight(weights: np.ndarray) -> float:
    """Total MST weight of a symmetric dense weight matrix (inf = no edge).

    Returns 0 for a single node and +inf when the graph is disconnected.
    """
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]
    if n <= 1:
        return 0.0
    in_tree = [False] * n
    best = [math.inf] * n
    best[0] = 0.0
    total = 0.0
    for _ in range(n):
        u = -1
        bu = math.inf
        for v in range(n):
            if not in_tree[v] and (u < 0 or best[v] < bu):
                u, bu = v, best[v]
        if not math.isfinite(bu):
            return math.inf
        in_tree[u] = True
        total += bu
        row = w[u]
        for v in range(n):
            if not in_tree[v] and row[v] < best[v]:
                best[v] = float(row[v])
    return total
