"""Exact brute-force polychromatic TSP for small instances.

Depth-first search over tours through vertex 0.  The first ``k`` vertices fix
the class order (so every cyclic order is explored, in both directions);
afterwards each slot may only take a vertex of the class the order dictates.
Branches whose partial cost reaches the incumbent are cut.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .instance import ClassOrder, Instance, Tour, make_tour

DEFAULT_BUDGET = 50_000_000


@dataclass(frozen=True)
class OracleResult:
    tour: Optional[Tour]
    sigma: Optional[ClassOrder]
    cost: float
    explored: int
    optimal: bool


def solve_exact(inst: Instance, budget: int = DEFAULT_BUDGET, upper_bound: float = math.inf) -> OracleResult:
    """Minimum-weight sigma-tour over all class orders ``sigma``.

    ``explored`` counts search nodes (partial tours).  When ``budget`` nodes
    are exhausted the best tour found so far is returned with
    ``optimal=False``.  A finite ``upper_bound`` seeds the incumbent; tours
    costing exactly the bound are still found.
    """
    n, k = inst.n, inst.k
    d = inst.dist.tolist()
    colors = inst.colors
    by_class = [inst.members(c) for c in range(k)]

    best_cost = upper_bound * (1 + 1e-12) + 1e-12 if math.isfinite(upper_bound) else math.inf
    best_order: Optional[list[int]] = None
    explored = 0
    exhausted = False

    path = [0]
    used = [False] * n
    used[0] = True
    class_used = [False] * k
    class_used[colors[0]] = True
    head = [colors[0]]

    def dfs(cost: float) -> None:
        nonlocal best_cost, best_order, explored, exhausted
        explored += 1
        if explored > budget:
            exhausted = True
            return
        pos = len(path)
        last = path[-1]
        if pos == n:
            total = cost + d[last][0]
            if total < best_cost:
                best_cost = total
                best_order = list(path)
            return
        if pos < k:
            candidates = [c for c in range(k) if not class_used[c]]
        else:
            candidates = [head[pos % k]]
        row = d[last]
        for c in candidates:
            fresh = pos < k
            if fresh:
                class_used[c] = True
                head.append(c)
            for v in by_class[c]:
                if used[v]:
                    continue
                nc = cost + row[v]
                if nc >= best_cost:
                    continue
                used[v] = True
                path.append(v)
                dfs(nc)
                path.pop()
                used[v] = False
                if exhausted:
                    break
            if fresh:
                head.pop()
                class_used[c] = False
            if exhausted:
                return

    dfs(0.0)
    if best_order is None:
        return OracleResult(None, None, math.inf, explored, False)
    tour = make_tour(inst, best_order)
    sigma = ClassOrder(tuple(colors[v] for v in best_order[:k]))
    return OracleResult(tour, sigma, tour.cost, explored, not exhausted)


def brute_force_tours(inst: Instance) -> tuple[float, tuple[int, ...]]:
    """Plain enumeration of all Hamiltonian cycles through vertex 0 (``n <= 9``).

    Independent of :func:`solve_exact`: no pruning, no class bookkeeping, the
    sigma-cycle property is tested on each complete permutation.
    """
    n, k = inst.n, inst.k
    d = inst.dist
    best = (math.inf, ())
    for rest in itertools.permutations(range(1, n)):
        order = (0,) + rest
        cols = [inst.colors[v] for v in order]
        if len(set(cols[:k])) != k or any(cols[i] != cols[i % k] for i in range(k, n)):
            continue
        cost = float(sum(d[order[i], order[(i + 1) % n]] for i in range(n)))
        if cost < best[0]:
            best = (cost, order)
    return best


def shortest_sigma_path(
    points: np.ndarray, colors: Sequence[int], sigma: ClassOrder
) -> tuple[float, tuple[int, ...]]:
    """Shortest open path visiting every point with colors following ``sigma`` cyclically.

    The path may start at any class of ``sigma``.  Exhaustive over start
    offset and, per color slot, over every unvisited point of that color.
    """
    pts = np.asarray(points, dtype=float)
    n = len(colors)
    k = len(sigma)
    if n % k:
        raise ValueError("point count must be a multiple of the class count")
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1)).tolist()
    by_class: dict[int, list[int]] = {c: [] for c in sigma}
    for v, c in enumerate(colors):
        by_class[c].append(v)

    best = [math.inf, ()]
    used = [False] * n
    path: list[int] = []

    def extend(offset: int, cost: float) -> None:
        pos = len(path)
        if pos == n:
            if cost < best[0]:
                best[0], best[1] = cost, tuple(path)
            return
        for v in by_class[sigma[offset + pos]]:
            if used[v]:
                continue
            nc = cost + (d[path[-1]][v] if path else 0.0)
            if nc >= best[0]:
                continue
            used[v] = True
            path.append(v)
            extend(offset, nc)
            path.pop()
            used[v] = False

    for offset in range(k):
        extend(offset, 0.0)
    return best[0], best[1]
