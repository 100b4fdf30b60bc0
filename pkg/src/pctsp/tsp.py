"""Metric TSP subroutines: exact Held-Karp, double-tree, 2-opt.

Each routine takes a symmetric ``m x m`` distance matrix and returns a
:class:`~pctsp.instance.Tour` over ``range(m)`` starting at vertex 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .instance import Tour, cycle_cost, make_tour

HELD_KARP_CAP = 18
AUTO_EXACT_LIMIT = 15


class TspSizeError(ValueError):
    pass


def _as_dist(dist) -> np.ndarray:
    d = np.asarray(dist, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {d.shape}")
    return d


def tsp_exact(dist, cap: int = HELD_KARP_CAP) -> Tour:
    """Held-Karp dynamic program over subsets of ``{1..m-1}``."""
    d = _as_dist(dist)
    m = d.shape[0]
    if m < 1:
        raise ValueError("empty distance matrix")
    if m > cap:
        raise TspSizeError(f"Held-Karp limited to {cap} vertices, got {m}")
    if m <= 3:
        return make_tour(d, range(m))

    r = m - 1  # vertices 1..m-1 are bits 0..r-1
    full = 1 << r
    sub = d[1:, 1:]
    dp = np.full((full, r), np.inf)
    parent = np.full((full, r), -1, dtype=np.int8)
    for j in range(r):
        dp[1 << j, j] = d[0, j + 1]

    popcount = np.array([bin(x).count("1") for x in range(full)])
    masks_by_size = [np.flatnonzero(popcount == size) for size in range(r + 1)]
    for size in range(2, r + 1):
        masks = masks_by_size[size]
        for j in range(r):
            bit = 1 << j
            sel = masks[(masks & bit) != 0]
            prev = sel ^ bit
            cand = dp[prev] + sub[:, j][None, :]
            best = np.argmin(cand, axis=1)
            dp[sel, j] = cand[np.arange(len(sel)), best]
            parent[sel, j] = best

    closing = dp[full - 1] + d[1:, 0]
    last = int(np.argmin(closing))
    path = []
    mask = full - 1
    while last >= 0:
        path.append(last + 1)
        prev = int(parent[mask, last])
        mask ^= 1 << last
        last = prev
    path.reverse()
    return make_tour(d, [0] + path)


def minimum_spanning_tree(dist) -> list[list[int]]:
    """Prim's algorithm from vertex 0; returns sorted child lists.

    Ties in the key update go to the smaller vertex index.
    """
    d = _as_dist(dist)
    m = d.shape[0]
    in_tree = np.zeros(m, dtype=bool)
    key = np.full(m, np.inf)
    link = np.full(m, -1)
    key[0] = 0.0
    children: list[list[int]] = [[] for _ in range(m)]
    for _ in range(m):
        cand = np.where(in_tree, np.inf, key)
        v = int(np.argmin(cand))  # argmin returns the first (smallest) index on ties
        in_tree[v] = True
        if link[v] >= 0:
            children[link[v]].append(v)
        upd = ~in_tree & (d[v] < key)
        key[upd] = d[v][upd]
        link[upd] = v
    for ch in children:
        ch.sort()
    return children


def tsp_double_tree(dist) -> Tour:
    """MST preorder walk from vertex 0, shortcut to a Hamiltonian cycle."""
    d = _as_dist(dist)
    m = d.shape[0]
    if m < 1:
        raise ValueError("empty distance matrix")
    children = minimum_spanning_tree(d)
    order = []
    stack = [0]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(reversed(children[v]))
    return make_tour(d, order)


def two_opt_improve(dist, tour: Tour, max_passes: int = 50, tol: float = 1e-12) -> Tour:
    """First-improvement 2-opt; each pass scans all ``(i, j)`` pairs once.

    Vertex ``tour.order[0]`` stays in front.  The result never costs more than
    the input.
    """
    d = _as_dist(dist)
    order = list(tour.order)
    m = len(order)
    if m < 4 or max_passes <= 0:
        return make_tour(d, order)
    for _ in range(max_passes):
        improved = False
        for i in range(m - 2):
            a, b = order[i], order[i + 1]
            for j in range(i + 2, m if i > 0 else m - 1):
                c, e = order[j], order[(j + 1) % m]
                delta = d[a, c] + d[b, e] - d[a, b] - d[c, e]
                if delta < -tol:
                    order[i + 1 : j + 1] = order[i + 1 : j + 1][::-1]
                    a, b = order[i], order[i + 1]
                    improved = True
        if not improved:
            break
    new = make_tour(d, order)
    if new.cost > tour.cost:
        return make_tour(d, tour.order)
    return new


def tsp_double_tree_2opt(dist) -> Tour:
    d = _as_dist(dist)
    return two_opt_improve(d, tsp_double_tree(d))


def tsp_auto(dist) -> Tour:
    d = _as_dist(dist)
    if d.shape[0] <= AUTO_EXACT_LIMIT:
        return tsp_exact(d)
    return tsp_double_tree_2opt(d)


def tsp_identity(dist) -> Tour:
    """Vertices in index order; no guarantee."""
    d = _as_dist(dist)
    return make_tour(d, range(d.shape[0]))


Ratio = Union[float, str]


@dataclass(frozen=True)
class TspSubroutine:
    """A registered TSP routine with its approximation ratio.

    ``ratio_alpha`` is a float ``>= 1`` for routines with a worst-case bound on
    metric inputs or ``"heuristic"``.  ``exact_up_to`` marks sizes on which the
    routine is exact, so the effective ratio there is 1.
    """

    name: str
    func: Callable[[np.ndarray], Tour]
    ratio_alpha: Ratio
    max_n: Optional[int] = None
    exact_up_to: int = 0

    def __call__(self, dist) -> Tour:
        d = _as_dist(dist)
        if self.max_n is not None and d.shape[0] > self.max_n:
            raise TspSizeError(f"{self.name} limited to {self.max_n} vertices, got {d.shape[0]}")
        return self.func(d)

    def ratio_for(self, m: int) -> Ratio:
        # tours on <= 3 vertices are unique up to direction
        if m <= max(3, self.exact_up_to):
            return 1.0
        return self.ratio_alpha


SUBROUTINES: dict[str, TspSubroutine] = {
    "exact": TspSubroutine("exact", tsp_exact, 1.0, max_n=HELD_KARP_CAP, exact_up_to=HELD_KARP_CAP),
    "double-tree": TspSubroutine("double-tree", tsp_double_tree, 2.0),
    "double-tree-2opt": TspSubroutine("double-tree-2opt", tsp_double_tree_2opt, 2.0),
    "auto": TspSubroutine("auto", tsp_auto, 2.0, exact_up_to=AUTO_EXACT_LIMIT),
    "identity": TspSubroutine("identity", tsp_identity, "heuristic"),
}


def get_subroutine(name: Union[str, TspSubroutine]) -> TspSubroutine:
    if isinstance(name, TspSubroutine):
        return name
    try:
        return SUBROUTINES[name]
    except KeyError:
        raise ValueError(f"unknown TSP subroutine {name!r}; choose from {sorted(SUBROUTINES)}") from None


def tour_is_hamiltonian(tour: Tour, m: int) -> bool:
    return sorted(tour.order) == list(range(m))


__all__ = [
    "HELD_KARP_CAP",
    "TspSizeError",
    "TspSubroutine",
    "SUBROUTINES",
    "cycle_cost",
    "get_subroutine",
    "minimum_spanning_tree",
    "tour_is_hamiltonian",
    "tsp_auto",
    "tsp_double_tree",
    "tsp_double_tree_2opt",
    "tsp_exact",
    "tsp_identity",
    "two_opt_improve",
]
