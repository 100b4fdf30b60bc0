"""Max 2-SAT to Euclidean polychromatic TSP gadget construction.

Classes are indexed so that the canonical valid order is the identity:
``R_i -> 3(i-1)``, ``T_i -> 3(i-1)+1``, ``F_i -> 3(i-1)+2`` and
``R_{n+1} -> 3n``.  A class order encodes a truth assignment when every
``R_i`` precedes ``T_i``/``F_i`` and those precede every later ``R``; the
relative order of ``T_i`` and ``F_i`` is the value of ``x_i``.

Each clause becomes a gadget of ``2(3n+1)`` points at nine distinct
locations.  An assignment satisfying the clause can traverse the gadget with
a path of length ``c + 2a``; otherwise the best path costs
``c + 2 sqrt(a^2 + 4)``.  The gadgets sit side by side on ``y in [-1, 1]``
and a strip holding one point per class lies far below at
``y = -(2W + 1)``, spaced so that only encoding orders can cross it in a
straight line.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .instance import ClassOrder, Instance, InstanceError, Tour, make_tour, verify_sigma_tour

# gadget locations as (dx in units of a, y); p4/p6 and p5/p7 coincide
LOCATIONS = {
    "p1": (0, -1),
    "p2": (1, 1),
    "p3": (1, -1),
    "p4": (2, 1),
    "p5": (2, -1),
    "p6": (2, 1),
    "p7": (2, -1),
    "p8": (3, 1),
    "p9": (3, 0),
    "p10": (9, 0),
    "p11": (27, -1),
}

# location visiting order keyed by (alpha literal satisfied, beta literal satisfied)
GADGET_PATHS = {
    (False, False): ("p1", "p2", "p3", "p4", "p6", "p7", "p8", "p9", "p5", "p10", "p11"),
    (True, False): ("p1", "p3", "p2", "p4", "p6", "p7", "p8", "p9", "p5", "p10", "p11"),
    (False, True): ("p1", "p2", "p3", "p5", "p7", "p6", "p8", "p9", "p4", "p10", "p11"),
    (True, True): ("p1", "p3", "p2", "p5", "p7", "p6", "p8", "p9", "p4", "p10", "p11"),
}

CASE_LABELS = {(False, False): "FF", (True, False): "TF", (False, True): "FT", (True, True): "TT"}


class ReductionError(ValueError):
    """Invalid 2-SAT input or reduction parameters."""


def R(i: int) -> int:
    return 3 * (i - 1)


def T(i: int) -> int:
    return 3 * (i - 1) + 1


def F(i: int) -> int:
    return 3 * (i - 1) + 2


def color_names(n: int) -> dict[int, str]:
    names = {}
    for i in range(1, n + 1):
        names[R(i)] = f"R_{i}"
        names[T(i)] = f"T_{i}"
        names[F(i)] = f"F_{i}"
    names[R(n + 1)] = f"R_{n + 1}"
    return names


# --------------------------------------------------------------------- 2-SAT


@dataclass(frozen=True)
class TwoSatInstance:
    n_vars: int
    clauses: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        clauses = tuple((int(p), int(q)) for p, q in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        if self.n_vars < 1:
            raise ReductionError("need at least one variable")
        for idx, (p, q) in enumerate(clauses):
            for lit in (p, q):
                if lit == 0 or abs(lit) > self.n_vars:
                    raise ReductionError(f"clause {idx + 1}: literal {lit} outside 1..{self.n_vars}")
            if abs(p) == abs(q):
                raise ReductionError(f"clause {idx + 1}: both literals use variable {abs(p)}")

    @property
    def m(self) -> int:
        return len(self.clauses)

    def occurrences(self) -> list[int]:
        """``n_i``: number of clauses mentioning variable ``i`` (index 0 unused)."""
        occ = [0] * (self.n_vars + 1)
        for p, q in self.clauses:
            occ[abs(p)] += 1
            occ[abs(q)] += 1
        return occ

    def count_satisfied(self, assign: Sequence[bool]) -> int:
        """Direct boolean evaluation; ``assign[i-1]`` is the value of ``x_i``."""

        def lit(v: int) -> bool:
            val = bool(assign[abs(v) - 1])
            return val if v > 0 else not val

        return sum(1 for p, q in self.clauses if lit(p) or lit(q))

    def to_text(self) -> str:
        lines = [f"p 2sat {self.n_vars} {self.m}"]
        lines += [f"{p} {q}" for p, q in self.clauses]
        return "\n".join(lines) + "\n"


def parse_2sat(text: str) -> TwoSatInstance:
    """Parse ``p 2sat <n> <m>`` followed by ``m`` clause lines.

    ``c`` comment lines and a DIMACS-style trailing ``0`` are tolerated.
    """
    header = None
    clauses: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if header is not None:
                raise ReductionError(f"line {lineno}: duplicate header")
            if len(parts) != 4 or parts[1] != "2sat":
                raise ReductionError(f"line {lineno}: expected 'p 2sat <n> <m>'")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise ReductionError(f"line {lineno}: non-integer header fields") from None
            continue
        if header is None:
            raise ReductionError(f"line {lineno}: clause before 'p 2sat' header")
        try:
            lits = [int(x) for x in parts]
        except ValueError:
            raise ReductionError(f"line {lineno}: non-integer literal") from None
        if len(lits) == 3 and lits[2] == 0:
            lits = lits[:2]
        if len(lits) != 2 or 0 in lits:
            raise ReductionError(f"line {lineno}: a clause is exactly two nonzero literals")
        clauses.append((lits[0], lits[1]))
    if header is None:
        raise ReductionError("missing 'p 2sat <n> <m>' header")
    if len(clauses) != header[1]:
        raise ReductionError(f"header announces {header[1]} clauses, found {len(clauses)}")
    return TwoSatInstance(header[0], tuple(clauses))


def load_2sat(path: str | Path) -> TwoSatInstance:
    return parse_2sat(Path(path).read_text())


def random_2sat(n_vars: int, m: int, rng: np.random.Generator) -> TwoSatInstance:
    """Uniform clauses on two distinct variables with random signs."""
    clauses = []
    for _ in range(m):
        a, b = rng.choice(n_vars, size=2, replace=False) + 1
        sa, sb = rng.choice([-1, 1], size=2)
        clauses.append((int(sa * a), int(sb * b)))
    return TwoSatInstance(n_vars, tuple(clauses))


# ---------------------------------------------------------------- parameters


def gadget_constant(a: float) -> float:
    """Length shared by every optimal gadget path, minus the ``2a`` / ``2 sqrt(a^2+4)`` leg."""
    return 5 + math.sqrt(a * a + 4) + math.sqrt(a * a + 1) + math.sqrt(49 * a * a + 1) + math.sqrt((18 * a) ** 2 + 1)


def unsatisfied_penalty(a: float) -> float:
    return 2 * math.sqrt(a * a + 4) - 2 * a


@dataclass(frozen=True)
class ReductionParams:
    a: float = 15.0
    b: float = 3000.0
    m: int = 2

    @property
    def W(self) -> float:
        return 27 * self.m * self.a + (self.m - 1) * self.b

    @property
    def l(self) -> float:
        return self.W / (4 * self.m)

    @property
    def c(self) -> float:
        return gadget_constant(self.a)

    @property
    def spacing(self) -> float:
        """Distance between consecutive gadget anchors."""
        return 27 * self.a + self.b

    def violations(self) -> list[str]:
        out = []
        if not self.a > 14:
            out.append(f"a > 14 fails (a = {self.a:g})")
        if not self.b > 30 * self.a:
            out.append(f"b > 30a fails (b = {self.b:g}, 30a = {30 * self.a:g})")
        if self.m < 2:
            out.append(f"l >= 30a infeasible for m = {self.m} (need m >= 2)")
        elif not self.l >= 30 * self.a:
            out.append(f"l >= 30a fails (l = {self.l:g}, 30a = {30 * self.a:g})")
        return out

    def validate(self) -> "ReductionParams":
        bad = self.violations()
        if bad:
            raise ReductionError("; ".join(bad))
        return self

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "l": self.l, "W": self.W}


def tour_length_formula(k_sat: int, params: ReductionParams) -> float:
    """``f(k)``: length of the constructed tour when ``k_sat`` clauses hold."""
    a, b, m = params.a, params.b, params.m
    c = params.c
    return 5 * params.W + (m - 1) * b + k_sat * (c + 2 * a) + (m - k_sat) * (c + 2 * math.sqrt(a * a + 4))


def epsilon_prime(eps: float, params: ReductionParams) -> float:
    """Target accuracy for a tour approximation that transfers ``eps`` to Max 2-SAT.

    ``eps * c_a / (2 c_ab - c_a)`` with ``c_a = 2(sqrt(a^2+4) - a)`` and
    ``c_ab = 135a + 6b + c``.  Note that ``c_ab m - 6b - c_a k`` falls short of
    :func:`tour_length_formula` by ``2 sqrt(a^2+4) m``; the expression is kept
    as stated.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    c_a = unsatisfied_penalty(params.a)
    c_ab = 5 * 27 * params.a + 6 * params.b + params.c
    return eps * c_a / (2 * c_ab - c_a)


# --------------------------------------------------------------- class orders


def sigma_from_assignment(assign: Sequence[bool], n: Optional[int] = None) -> ClassOrder:
    n = len(assign) if n is None else n
    if len(assign) != n:
        raise ValueError(f"assignment has {len(assign)} values, expected {n}")
    sigma = []
    for i in range(1, n + 1):
        sigma.append(R(i))
        sigma.extend((T(i), F(i)) if assign[i - 1] else (F(i), T(i)))
    sigma.append(R(n + 1))
    return ClassOrder(tuple(sigma))


def assignment_from_sigma(sigma: ClassOrder, n: int) -> tuple[bool, ...]:
    pos = sigma.position()
    return tuple(pos[T(i)] < pos[F(i)] for i in range(1, n + 1))


def is_valid_sigma(sigma: ClassOrder | Sequence[int], n: int) -> bool:
    sigma = sigma if isinstance(sigma, ClassOrder) else ClassOrder(tuple(sigma))
    if len(sigma) != 3 * n + 1:
        raise ValueError(f"class order has {len(sigma)} entries, expected 3n+1 = {3 * n + 1}")
    pos = sigma.position()
    for i in range(1, n + 1):
        if not (pos[R(i)] < pos[T(i)] and pos[R(i)] < pos[F(i)]):
            return False
        later = min(pos[R(j)] for j in range(i + 1, n + 2))
        if not (pos[T(i)] < later and pos[F(i)] < later):
            return False
    return True


def gadget_color_sets(alpha: int, beta: int, n: int) -> tuple[list[int], list[int], list[int]]:
    """Color sets ``A``, ``B``, ``C`` jumped over before, between and after the tested pairs."""
    A = [col for j in range(1, alpha) for col in (R(j), T(j), F(j))] + [R(alpha)]
    B = [col for j in range(alpha + 1, beta) for col in (R(j), T(j), F(j))] + [R(beta)]
    C = [col for j in range(beta + 1, n + 1) for col in (R(j), T(j), F(j))] + [R(n + 1)]
    return A, B, C


def is_alpha_beta_valid(sigma: ClassOrder, alpha: int, beta: int, n: int) -> bool:
    """``A < {T_a, F_a} < B < {T_b, F_b} < C`` in the linear order of ``sigma``."""
    pos = sigma.position()
    A, B, C = gadget_color_sets(alpha, beta, n)
    blocks = [A, [T(alpha), F(alpha)], B, [T(beta), F(beta)], C]
    for lo, hi in zip(blocks, blocks[1:]):
        if max(pos[x] for x in lo) > min(pos[x] for x in hi):
            return False
    return True


def satisfied_clauses(sigma: ClassOrder, sat: TwoSatInstance) -> int:
    if not is_valid_sigma(sigma, sat.n_vars):
        raise ReductionError("class order does not encode a truth assignment")
    return sat.count_satisfied(assignment_from_sigma(sigma, sat.n_vars))


# -------------------------------------------------------------------- gadgets


@dataclass(frozen=True)
class Placement:
    point: tuple[float, float]
    color: int
    location: str


def _normalize_clause(clause: tuple[int, int]) -> tuple[int, int]:
    p, q = clause
    if abs(p) == abs(q):
        raise ReductionError(f"clause {clause} uses one variable twice")
    return (p, q) if abs(p) < abs(q) else (q, p)


def build_gadget(clause: tuple[int, int], anchor_x: float, a: float, n: int) -> list[Placement]:
    """Points of the gadget testing ``clause`` with its leftmost point at ``(anchor_x, -1)``.

    The color making a literal true goes on ``y = -1``, the other on ``y = 1``.
    """
    p, q = _normalize_clause(clause)
    alpha, beta = abs(p), abs(q)
    if beta > n:
        raise ReductionError(f"clause {clause} mentions a variable beyond n = {n}")
    A, B, C = gadget_color_sets(alpha, beta, n)
    sat_a, unsat_a = (T(alpha), F(alpha)) if p > 0 else (F(alpha), T(alpha))
    sat_b, unsat_b = (T(beta), F(beta)) if q > 0 else (F(beta), T(beta))
    content = {
        "p1": A,
        "p2": [unsat_a],
        "p3": [sat_a],
        "p4": B,
        "p5": B,
        "p6": [unsat_b],
        "p7": [sat_b],
        "p8": C,
        "p9": A + [T(alpha), F(alpha)],
        "p10": [T(beta), F(beta)],
        "p11": C,
    }
    out = []
    for loc, cols in content.items():
        dx, y = LOCATIONS[loc]
        for col in sorted(cols):
            out.append(Placement((anchor_x + dx * a, float(y)), col, loc))
    return out


def gadget_path(placements: Sequence[Placement], sigma: ClassOrder, case: tuple[bool, bool]) -> list[int]:
    """Indices into ``placements`` for the candidate path of ``case``.

    Coincident points at a location are visited in ``sigma`` order.
    """
    pos = sigma.position()
    by_loc: dict[str, list[int]] = {}
    for idx, pl in enumerate(placements):
        by_loc.setdefault(pl.location, []).append(idx)
    path = []
    for loc in GADGET_PATHS[case]:
        path.extend(sorted(by_loc[loc], key=lambda idx: pos[placements[idx].color]))
    return path


def path_length(points: np.ndarray, path: Sequence[int]) -> float:
    pts = np.asarray(points, dtype=float)[list(path)]
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def path_projection(points: np.ndarray, path: Sequence[int]) -> float:
    """Length of the path projected on the x-axis."""
    xs = np.asarray(points, dtype=float)[list(path), 0]
    return float(np.abs(np.diff(xs)).sum())


def gadget_case(clause: tuple[int, int], assign: Sequence[bool]) -> tuple[bool, bool]:
    """Whether each literal of the (normalized) clause is true under ``assign``."""
    p, q = _normalize_clause(clause)

    def holds(lit: int) -> bool:
        val = bool(assign[abs(lit) - 1])
        return val if lit > 0 else not val

    return holds(p), holds(q)


@dataclass(frozen=True)
class GadgetRow:
    case: str
    length: float
    expected: float
    projection: float


def gadget_table(a: float, n: int = 2, clause: tuple[int, int] = (1, 2)) -> list[GadgetRow]:
    """Lengths of the four candidate paths through one gadget, in FF, TF, FT, TT order."""
    placements = build_gadget(clause, 0.0, a, n)
    pts = np.array([pl.point for pl in placements])
    p, q = _normalize_clause(clause)
    c = gadget_constant(a)
    rows = []
    for case in ((False, False), (True, False), (False, True), (True, True)):
        # choose variable values that make each literal's truth match the case
        assign = [True] * n
        assign[abs(p) - 1] = case[0] if p > 0 else not case[0]
        assign[abs(q) - 1] = case[1] if q > 0 else not case[1]
        sigma = sigma_from_assignment(assign)
        path = gadget_path(placements, sigma, case)
        expected = c + (2 * a if any(case) else 2 * math.sqrt(a * a + 4))
        rows.append(GadgetRow(CASE_LABELS[case], path_length(pts, path), expected, path_projection(pts, path)))
    return rows


# --------------------------------------------------------------- full layout


@dataclass
class ReductionLayout:
    params: ReductionParams
    sat: TwoSatInstance
    instance: Instance
    color_names: dict[int, str]
    gadget_anchors: list[float]
    roles: list[tuple]  # per vertex: ("strip", name) or ("gadget", clause_index, location)
    strip: dict[int, int] = field(default_factory=dict)  # class -> strip vertex
    gadgets: list[list[int]] = field(default_factory=list)  # vertex ids per gadget, placement order

    @property
    def n_points(self) -> int:
        return self.instance.n

    def sidecar(self) -> dict:
        roles = {}
        for v, role in enumerate(self.roles):
            if role[0] == "strip":
                roles[str(v)] = {"part": "S", "point": role[1]}
            else:
                roles[str(v)] = {"part": "gadget", "clause": role[1], "location": role[2]}
        return {
            "color_names": {str(c): name for c, name in self.color_names.items()},
            "roles": roles,
            "params": self.params.as_dict(),
            "gadget_anchors": list(self.gadget_anchors),
            "clauses": [list(c) for c in self.sat.clauses],
            "n_vars": self.sat.n_vars,
        }


def build_layout(sat: TwoSatInstance, a: float = 15.0, b: Optional[float] = None) -> ReductionLayout:
    """Full point set: the strip ``S`` (vertices ``0..3n``) followed by the gadgets."""
    b = 200 * a if b is None else b
    params = ReductionParams(a, b, sat.m).validate()
    n = sat.n_vars
    W, l = params.W, params.l
    y_strip = -(2 * W + 1)
    occ = sat.occurrences()

    points: list[tuple[float, float]] = []
    colors: list[int] = []
    roles: list[tuple] = []
    strip: dict[int, int] = {}

    def add(pt, col, role):
        points.append(pt)
        colors.append(col)
        roles.append(role)
        return len(points) - 1

    cum = 0  # N_{i-1}
    for i in range(1, n + 1):
        x_r = W - 2 * l * cum
        strip[R(i)] = add((x_r, y_strip), R(i), ("strip", f"r_{i}"))
        x_tf = x_r - l * occ[i]
        strip[T(i)] = add((x_tf, y_strip), T(i), ("strip", f"t_{i}"))
        strip[F(i)] = add((x_tf, y_strip), F(i), ("strip", f"f_{i}"))
        cum += occ[i]
    # W - 2 l N_n == 0 since N_n = 2m and l = W / 4m
    strip[R(n + 1)] = add((0.0, y_strip), R(n + 1), ("strip", f"r_{n + 1}"))

    anchors = []
    gadgets = []
    for ci, clause in enumerate(sat.clauses):
        x0 = ci * params.spacing
        anchors.append(x0)
        ids = [add(pl.point, pl.color, ("gadget", ci, pl.location)) for pl in build_gadget(clause, x0, a, n)]
        gadgets.append(ids)

    inst = Instance.euclidean(points, colors, k=3 * n + 1)
    return ReductionLayout(params, sat, inst, color_names(n), anchors, roles, strip, gadgets)


def strip_path(layout: ReductionLayout, sigma: ClassOrder) -> list[int]:
    """Strip points in ``sigma`` order."""
    return [layout.strip[c] for c in sigma.sigma]


def constructive_tour(layout: ReductionLayout, assign: Sequence[bool]) -> Tour:
    """Tour through the strip west-bound, then every gadget east-bound, then back up.

    Raises :class:`RuntimeError` if the result is not a tour for the class
    order encoding ``assign``.
    """
    n = layout.sat.n_vars
    sigma = sigma_from_assignment(assign, n)
    pos = sigma.position()
    inst = layout.instance
    order = strip_path(layout, sigma)
    for ci, clause in enumerate(layout.sat.clauses):
        ids = layout.gadgets[ci]
        by_loc: dict[str, list[int]] = {}
        for v in ids:
            by_loc.setdefault(layout.roles[v][2], []).append(v)
        for loc in GADGET_PATHS[gadget_case(clause, assign)]:
            order.extend(sorted(by_loc[loc], key=lambda v: pos[inst.colors[v]]))
    tour = make_tour(inst, order)
    verdict = verify_sigma_tour(inst, tour)
    if not verdict.ok or verdict.sigma != sigma:
        raise RuntimeError(f"constructed tour is not a sigma-tour for {sigma.sigma}: {verdict.reason}")
    return tour


@dataclass(frozen=True)
class CertificationRow:
    assign: tuple[bool, ...]
    k_sat: int
    formula: float
    tour_length: float

    @property
    def match(self) -> bool:
        return abs(self.tour_length - self.formula) <= 1e-6 * self.formula


def certify_all(layout: ReductionLayout) -> list[CertificationRow]:
    """Constructive tour vs ``f(k_sat)`` for every assignment."""
    n = layout.sat.n_vars
    rows = []
    for bits in itertools.product([False, True], repeat=n):
        k_sat = layout.sat.count_satisfied(bits)
        tour = constructive_tour(layout, bits)
        rows.append(CertificationRow(bits, k_sat, tour_length_formula(k_sat, layout.params), tour.cost))
    return rows


def save_layout(layout: ReductionLayout, prefix: str | Path) -> tuple[Path, Path]:
    prefix = str(prefix)
    inst_path = Path(prefix + ".instance.json")
    side_path = Path(prefix + ".sidecar.json")
    inst_path.write_text(json.dumps(layout.instance.to_dict()) + "\n")
    side_path.write_text(json.dumps(layout.sidecar(), indent=1) + "\n")
    return inst_path, side_path
