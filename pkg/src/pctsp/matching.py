"""Minimum-cost perfect matching between two color classes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import Instance, InstanceError


@dataclass(frozen=True)
class BipartiteMatching:
    left_class: int
    right_class: int
    pairs: tuple[tuple[int, int], ...]
    cost: float


def hungarian(cost: np.ndarray) -> tuple[list[int], np.ndarray, np.ndarray]:
    """Successive shortest augmenting paths with row/column potentials.

    Rows are inserted in ascending order; column scans run in ascending index
    order with strict comparisons, so ties always go to the smaller column.
    Returns ``(assign, u, v)`` with ``assign[row] = col`` and dual potentials
    satisfying ``cost[i, j] - u[i] - v[j] >= 0`` (zero on matched pairs).
    """
    cost = np.asarray(cost, dtype=np.float64)
    s = cost.shape[0]
    if cost.shape != (s, s):
        raise ValueError("cost matrix must be square")
    inf = float("inf")
    # 1-based with a dummy column 0 holding the row being inserted
    u = np.zeros(s + 1)
    v = np.zeros(s + 1)
    owner = [0] * (s + 1)
    way = [0] * (s + 1)
    for row in range(1, s + 1):
        owner[0] = row
        j0 = 0
        minv = np.full(s + 1, inf)
        used = np.zeros(s + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = owner[j0]
            free = ~used[1:]
            red = cost[i0 - 1] - u[i0] - v[1:]
            better = free & (red < minv[1:])
            minv[1:][better] = red[better]
            for j in np.flatnonzero(better) + 1:
                way[j] = j0
            cand = np.where(free, minv[1:], inf)
            j1 = int(np.argmin(cand)) + 1
            delta = cand[j1 - 1]
            for j in range(s + 1):
                if used[j]:
                    u[owner[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1
    assign = [0] * s
    for j in range(1, s + 1):
        assign[owner[j] - 1] = j - 1
    return assign, u[1:], v[1:]


def _lex_smallest(assign: list[int], tight: np.ndarray) -> list[int]:
    """Lexicographically smallest perfect matching inside the tight-edge graph.

    Row ``i`` is improved to the smallest tight column that still admits a
    perfect matching on the rows after it, by rotating along an alternating
    path through unfixed rows.
    """
    s = len(assign)
    assign = list(assign)
    owner = [0] * s
    for i, j in enumerate(assign):
        owner[j] = i

    for i in range(s):
        for j in np.flatnonzero(tight[i]):
            j = int(j)
            if j >= assign[i]:
                break
            if owner[j] < i:
                continue
            target = assign[i]
            # find an alternating path from owner[j] to the freed column target
            seen = [False] * s
            path: list[tuple[int, int]] = []

            def reach(r: int) -> bool:
                for c in np.flatnonzero(tight[r]):
                    c = int(c)
                    if seen[c] or c == j:
                        continue
                    if c == target:
                        path.append((r, c))
                        return True
                    if owner[c] <= i:
                        continue
                    seen[c] = True
                    path.append((r, c))
                    if reach(owner[c]):
                        return True
                    path.pop()
                return False

            if reach(owner[j]):
                for r, c in path:
                    assign[r] = c
                    owner[c] = r
                assign[i] = j
                owner[j] = i
                break
    return assign


def solve_assignment(cost: np.ndarray, tol: float = 1e-12) -> tuple[list[int], float]:
    """Minimum-cost assignment; among optimal ones the lexicographically smallest.

    Ties are judged on reduced costs within ``tol`` scaled by the largest entry.
    """
    cost = np.asarray(cost, dtype=np.float64)
    s = cost.shape[0]
    if s == 0:
        return [], 0.0
    assign, u, v = hungarian(cost)
    scale = max(1.0, float(np.abs(cost).max()))
    tight = (cost - u[:, None] - v[None, :]) <= tol * scale
    rows = np.arange(s)
    base = float(cost[rows, assign].sum())
    lex = _lex_smallest(assign, tight)
    total = float(cost[rows, lex].sum())
    if total > base + 4 * np.finfo(float).eps * scale * s:
        # rounding admitted a slightly worse matching into the tight graph
        return assign, base
    return lex, total


def min_cost_matching(inst: Instance, a: int, b: int) -> BipartiteMatching:
    if a == b:
        raise InstanceError(f"matching needs two distinct classes, got {a} twice")
    if not (0 <= a < inst.k and 0 <= b < inst.k):
        raise InstanceError(f"class index out of range [0, {inst.k})")
    left, right = inst.members(a), inst.members(b)
    block = inst.dist[np.ix_(left, right)]
    assign, total = solve_assignment(block)
    pairs = tuple((left[i], right[j]) for i, j in enumerate(assign))
    return BipartiteMatching(a, b, pairs, total)


def matching_cost_matrix(inst: Instance) -> np.ndarray:
    """``k x k`` matrix of pairwise class matching costs (zero diagonal)."""
    k = inst.k
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = min_cost_matching(inst, i, j).cost
    return out
