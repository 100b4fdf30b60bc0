"""Polychromatic instances, tours and class orders.

An instance is a complete weighted graph whose vertices are split into ``k``
equal-size color classes.  Weights come either from Euclidean coordinates or
from an explicit symmetric matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

DEFAULT_TOL = 1e-9


class InstanceError(ValueError):
    """Malformed instance, tour or class order."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Instance:
    kind: str
    colors: tuple[int, ...]
    k: int
    points: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    _dist: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in ("euclidean", "matrix"):
            raise InstanceError(f"unknown instance kind {self.kind!r}")
        colors = tuple(int(c) for c in self.colors)
        object.__setattr__(self, "colors", colors)
        n = len(colors)
        k = int(self.k)
        if k < 2:
            raise InstanceError(f"need k >= 2 color classes, got {k}")
        if n < k or n % k:
            raise InstanceError(f"n={n} must be a positive multiple of k={k}")
        if any(c < 0 or c >= k for c in colors):
            raise InstanceError(f"color index outside [0, {k})")
        counts = np.bincount(np.asarray(colors, dtype=np.int64), minlength=k)
        if not np.all(counts == n // k):
            raise InstanceError(f"color classes must all have size {n // k}, got {list(counts)}")

        if self.kind == "euclidean":
            if self.points is None or self.weights is not None:
                raise InstanceError("euclidean instance needs points and no weights")
            pts = np.array(self.points, dtype=np.float64)
            if pts.ndim == 1:
                pts = pts.reshape(-1, 1)
            if pts.ndim != 2 or pts.shape[0] != n or pts.shape[1] < 1:
                raise InstanceError(f"points must be an {n} x d array")
            if not np.all(np.isfinite(pts)):
                raise InstanceError("points must be finite")
            diff = pts[:, None, :] - pts[None, :, :]
            dist = np.sqrt((diff * diff).sum(axis=-1))
            object.__setattr__(self, "points", _frozen(pts))
        else:
            if self.weights is None or self.points is not None:
                raise InstanceError("matrix instance needs weights and no points")
            w = np.array(self.weights, dtype=np.float64)
            if w.shape != (n, n):
                raise InstanceError(f"weights must be {n} x {n}, got {w.shape}")
            if not np.all(np.isfinite(w)) or np.any(w < 0):
                raise InstanceError("weights must be finite and nonnegative")
            if np.any(np.diag(w) != 0):
                raise InstanceError("weights must have a zero diagonal")
            if not np.array_equal(w, w.T):
                raise InstanceError("weights must be symmetric")
            dist = w.copy()
            object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "_dist", _frozen(dist))

    @classmethod
    def euclidean(cls, points: Sequence[Sequence[float]], colors: Sequence[int], k: Optional[int] = None) -> "Instance":
        colors = list(colors)
        return cls("euclidean", tuple(colors), k if k is not None else max(colors) + 1, points=np.asarray(points, dtype=float))

    @classmethod
    def matrix(cls, weights: Sequence[Sequence[float]], colors: Sequence[int], k: Optional[int] = None) -> "Instance":
        colors = list(colors)
        return cls("matrix", tuple(colors), k if k is not None else max(colors) + 1, weights=np.asarray(weights, dtype=float))

    @property
    def n(self) -> int:
        return len(self.colors)

    @property
    def class_size(self) -> int:
        return self.n // self.k

    @property
    def dist(self) -> np.ndarray:
        """Read-only ``n x n`` distance matrix."""
        return self._dist

    def members(self, c: int) -> list[int]:
        """Vertices of class ``c`` in ascending index order."""
        return [v for v, col in enumerate(self.colors) if col == c]

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "euclidean":
            out["points"] = self.points.tolist()
        else:
            out["weights"] = self.weights.tolist()
        out["colors"] = list(self.colors)
        out["k"] = self.k
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Instance":
        try:
            kind = data["kind"]
            colors = data["colors"]
            k = data["k"]
        except (KeyError, TypeError) as exc:
            raise InstanceError(f"instance object missing field: {exc}") from None
        has_pts, has_w = "points" in data, "weights" in data
        if has_pts == has_w:
            raise InstanceError("exactly one of 'points' / 'weights' must be present")
        if kind == "euclidean" and not has_pts or kind == "matrix" and not has_w:
            raise InstanceError(f"kind {kind!r} does not match the coordinate field present")
        try:
            if has_pts:
                return cls("euclidean", tuple(colors), k, points=np.asarray(data["points"], dtype=float))
            return cls("matrix", tuple(colors), k, weights=np.asarray(data["weights"], dtype=float))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InstanceError):
                raise
            raise InstanceError(str(exc)) from None


@dataclass(frozen=True)
class ClassOrder:
    """A cyclic order ``sigma`` on the color classes."""

    sigma: tuple[int, ...]

    def __post_init__(self) -> None:
        sigma = tuple(int(c) for c in self.sigma)
        object.__setattr__(self, "sigma", sigma)
        if sorted(sigma) != list(range(len(sigma))):
            raise InstanceError(f"{sigma} is not a permutation of range({len(sigma)})")

    def __len__(self) -> int:
        return len(self.sigma)

    def __iter__(self):
        return iter(self.sigma)

    def __getitem__(self, i: int) -> int:
        return self.sigma[i % len(self.sigma)]

    def position(self) -> dict[int, int]:
        return {c: i for i, c in enumerate(self.sigma)}

    def rotated_to(self, first: int) -> "ClassOrder":
        i = self.sigma.index(first)
        return ClassOrder(self.sigma[i:] + self.sigma[:i])

    def same_cycle(self, other: "ClassOrder") -> bool:
        """Equal up to rotation (reflections are distinct)."""
        if len(self) != len(other):
            return False
        return self.rotated_to(0).sigma == other.rotated_to(0).sigma


@dataclass(frozen=True)
class Tour:
    order: tuple[int, ...]
    cost: float

    def __len__(self) -> int:
        return len(self.order)

    def to_dict(self) -> dict:
        return {"order": list(self.order)}


def cycle_cost(dist: np.ndarray, order: Sequence[int]) -> float:
    """Length of the closed walk ``order`` (closing edge included)."""
    if len(order) < 2:
        return 0.0
    idx = np.asarray(order, dtype=np.intp)
    return float(dist[idx, np.roll(idx, -1)].sum())


def make_tour(inst_or_dist, order: Iterable[int]) -> Tour:
    dist = inst_or_dist.dist if isinstance(inst_or_dist, Instance) else np.asarray(inst_or_dist)
    order = tuple(int(v) for v in order)
    return Tour(order, cycle_cost(dist, order))


def distance(inst: Instance, i: int, j: int) -> float:
    n = inst.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"vertex index out of range [0, {n}): ({i}, {j})")
    return float(inst.dist[i, j])


@dataclass(frozen=True)
class MetricReport:
    is_metric: bool
    worst_violation: float


def check_metric(inst_or_dist, tol: float = DEFAULT_TOL) -> MetricReport:
    """Check all ``n^3`` triangle inequalities ``d(i,j) <= d(i,l) + d(l,j)``.

    ``worst_violation`` is ``max(d(i,j) - d(i,l) - d(l,j))`` over all triples,
    clipped at 0 from below.  Euclidean instances are metric by construction.
    """
    if isinstance(inst_or_dist, Instance):
        if inst_or_dist.kind == "euclidean":
            return MetricReport(True, 0.0)
        d = inst_or_dist.dist
    else:
        d = np.asarray(inst_or_dist, dtype=float)
    worst = 0.0
    for mid in range(d.shape[0]):
        via = d[:, mid][:, None] + d[mid, :][None, :]
        worst = max(worst, float((d - via).max(initial=0.0)))
    return MetricReport(worst <= tol, worst)


@dataclass(frozen=True)
class TourVerdict:
    ok: bool
    sigma: Optional[ClassOrder]
    reason: str

    def __bool__(self) -> bool:
        return self.ok


def verify_sigma_tour(inst: Instance, tour: Tour | Sequence[int]) -> TourVerdict:
    """Check that ``tour`` is Hamiltonian and visits classes as ``sigma`` repeated.

    The returned ``sigma`` starts with the color of ``order[0]``.
    """
    order = list(tour.order if isinstance(tour, Tour) else tour)
    n, k = inst.n, inst.k
    seen: set[int] = set()
    for pos, v in enumerate(order):
        if not isinstance(v, (int, np.integer)) or not 0 <= v < n:
            return TourVerdict(False, None, f"position {pos}: vertex {v!r} out of range [0, {n})")
        if v in seen:
            return TourVerdict(False, None, f"position {pos}: vertex {v} visited twice")
        seen.add(v)
    if len(order) != n:
        missing = sorted(set(range(n)) - seen)
        return TourVerdict(False, None, f"tour has {len(order)} vertices, missing {missing[:10]}")

    head = [inst.colors[v] for v in order[:k]]
    if len(set(head)) != k:
        dup = next(pos for pos in range(k) if head[pos] in head[:pos])
        return TourVerdict(False, None, f"position {dup}: color {head[dup]} repeats within the first {k} vertices")
    for pos in range(k, n):
        c = inst.colors[order[pos]]
        if c != head[pos % k]:
            return TourVerdict(
                False, None, f"position {pos}: vertex {order[pos]} has color {c}, expected {head[pos % k]}"
            )
    return TourVerdict(True, ClassOrder(tuple(head)), "ok")


def load_instance(path: str | Path) -> Instance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: not valid JSON ({exc})") from None
    return Instance.from_dict(data)


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(inst.to_dict()) + "\n")


def load_tour(path: str | Path, inst: Optional[Instance] = None) -> Tour:
    try:
        data = json.loads(Path(path).read_text())
        order = [int(v) for v in data["order"]]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InstanceError(f"{path}: malformed tour file ({exc})") from None
    cost = cycle_cost(inst.dist, order) if inst is not None and all(0 <= v < inst.n for v in order) else float("nan")
    return Tour(tuple(order), cost)


def save_tour(tour: Tour, path: str | Path) -> None:
    Path(path).write_text(json.dumps(tour.to_dict()) + "\n")
