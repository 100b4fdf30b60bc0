"""Random instances and approximation-ratio measurements.

All randomness goes through ``numpy.random.Generator`` seeded with
``PCG64(seed)``, so an ``(n, k, seed)`` triple always yields the same instance.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .instance import Instance, InstanceError
from .oracle import solve_exact
from .solver import solve

CSV_COLUMNS = ["n", "k", "seed", "approx_cost", "oracle_cost", "ratio", "order_ms", "glue_ms", "oracle_ms"]


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _colors(n: int, k: int, rng: np.random.Generator) -> list[int]:
    if k < 2 or n % k:
        raise InstanceError(f"k={k} must be >= 2 and divide n={n}")
    colors = np.arange(n) % k
    rng.shuffle(colors)
    return colors.tolist()


def gen_random_euclidean(n: int, k: int, seed: int, box: float = 1.0) -> Instance:
    """``n`` uniform points in ``[0, box]^2``, round-robin colors shuffled by ``seed``."""
    rng = _rng(seed)
    colors = _colors(n, k, rng)
    pts = rng.random((n, 2)) * box
    return Instance.euclidean(pts, colors, k=k)


def gen_random_metric(n: int, k: int, seed: int, low: float = 1.0, high: float = 10.0) -> Instance:
    """Uniform random symmetric weights closed under shortest paths."""
    rng = _rng(seed)
    colors = _colors(n, k, rng)
    raw = rng.uniform(low, high, size=(n, n))
    raw = np.triu(raw, 1)
    raw = raw + raw.T
    closed = shortest_path(raw, method="FW", directed=False)
    closed = np.minimum(closed, closed.T)
    np.fill_diagonal(closed, 0.0)
    return Instance.matrix(closed, colors, k=k)


@dataclass
class RatioRecord:
    instance_id: str
    n: int
    k: int
    seed: int
    approx_cost: float
    oracle_cost: Optional[float] = None
    ratio: Optional[float] = None
    guarantee: object = None
    wall_ms: dict = field(default_factory=dict)

    def csv_row(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "seed": self.seed,
            "approx_cost": repr(self.approx_cost),
            "oracle_cost": "" if self.oracle_cost is None else repr(self.oracle_cost),
            "ratio": "" if self.ratio is None else repr(self.ratio),
            "order_ms": f"{self.wall_ms.get('order_ms', 0.0):.3f}",
            "glue_ms": f"{self.wall_ms.get('glue_ms', 0.0):.3f}",
            "oracle_ms": "" if "oracle_ms" not in self.wall_ms else f"{self.wall_ms['oracle_ms']:.3f}",
        }


@dataclass
class StudyConfig:
    sizes: Sequence[int] = (6, 8, 10)
    ks: Sequence[int] = (2, 3, 5)
    trials: int = 10
    sub_order: str = "exact"
    sub_glue: str = "exact"
    oracle_cap: int = 10
    oracle_budget: int = 5_000_000
    kind: str = "euclidean"
    base_seed: int = 0


def run_ratio_study(config: StudyConfig) -> list[RatioRecord]:
    """Solve every ``(n, k, trial)`` cell; compare with the oracle when ``n <= oracle_cap``.

    Cells with ``k`` not dividing ``n`` are skipped.  Seeds are
    ``base_seed + trial``.  Records come back sorted by ``(n, k, seed)``.
    """
    gen = gen_random_euclidean if config.kind == "euclidean" else gen_random_metric
    records = []
    for n in config.sizes:
        for k in config.ks:
            if k < 2 or n % k:
                continue
            for trial in range(config.trials):
                seed = config.base_seed + trial
                inst = gen(n, k, seed)
                rep = solve(inst, config.sub_order, config.sub_glue)
                rec = RatioRecord(
                    f"{config.kind}-n{n}-k{k}-s{seed}", n, k, seed, rep.tour.cost,
                    guarantee=rep.guarantee, wall_ms=dict(rep.timings),
                )
                if n <= config.oracle_cap:
                    t0 = time.perf_counter()
                    res = solve_exact(inst, budget=config.oracle_budget, upper_bound=rep.tour.cost)
                    rec.wall_ms["oracle_ms"] = 1e3 * (time.perf_counter() - t0)
                    if res.optimal:
                        # a seeded incumbent only prunes; if nothing beats it the approximation is optimal
                        rec.oracle_cost = res.cost if res.tour is not None else rep.tour.cost
                        rec.ratio = rep.tour.cost / rec.oracle_cost if rec.oracle_cost > 0 else 1.0
                records.append(rec)
    records.sort(key=lambda r: (r.n, r.k, r.seed))
    return records


def summarize(records: Iterable[RatioRecord]) -> list[dict]:
    """Max and mean ratio per ``(n, k)`` cell."""
    cells: dict[tuple[int, int], list[float]] = {}
    for r in records:
        cells.setdefault((r.n, r.k), [])
        if r.ratio is not None:
            cells[(r.n, r.k)].append(r.ratio)
    out = []
    for (n, k), ratios in sorted(cells.items()):
        out.append({
            "n": n,
            "k": k,
            "count": len(ratios),
            "max_ratio": max(ratios) if ratios else None,
            "mean_ratio": float(np.mean(ratios)) if ratios else None,
        })
    return out


def records_to_csv(records: Iterable[RatioRecord]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow(r.csv_row())
    return buf.getvalue()
