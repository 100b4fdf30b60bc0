"""Command-line entry point: ``pctsp <command> ...``.

Exit codes: 0 success, 2 input/parse error, 3 constraint or guarantee
violation, 4 internal verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import bench, hardness
from .instance import ClassOrder, Instance, InstanceError, Tour, check_metric, load_instance, load_tour, save_instance, save_tour, verify_sigma_tour
from .oracle import solve_exact
from .solver import NonMetricError, VerificationError, fixed_order_tour, solve
from .tsp import SUBROUTINES

EXIT_OK, EXIT_INPUT, EXIT_CONSTRAINT, EXIT_INTERNAL = 0, 2, 3, 4


class CliExit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fmt_guarantee(g) -> str:
    return g if isinstance(g, str) else f"{g:g}"


def _read_instance(path: str) -> Instance:
    try:
        return load_instance(path)
    except FileNotFoundError:
        raise CliExit(EXIT_INPUT, f"{path}: no such file") from None
    except InstanceError as exc:
        raise CliExit(EXIT_INPUT, f"{path}: {exc}") from None


def _read_sigma(path: str, k: int) -> ClassOrder:
    try:
        data = json.loads(Path(path).read_text())
        seq = data["sigma"] if isinstance(data, dict) else data
        sigma = ClassOrder(tuple(int(c) for c in seq))
    except FileNotFoundError:
        raise CliExit(EXIT_INPUT, f"{path}: no such file") from None
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CliExit(EXIT_INPUT, f"{path}: invalid class order ({exc})") from None
    if len(sigma) != k:
        raise CliExit(EXIT_INPUT, f"{path}: class order has {len(sigma)} entries, instance has k={k}")
    return sigma


# ------------------------------------------------------------------ svg dump


def write_svg(path: str, points: np.ndarray, colors: Sequence[int], order: Optional[Sequence[int]] = None, size: int = 800) -> None:
    """Static rendering of the first two coordinates, optionally with a closed tour."""
    pts = np.asarray(points, dtype=float)
    if pts.shape[1] == 1:
        pts = np.hstack([pts, np.zeros_like(pts)])
    lo, hi = pts[:, :2].min(axis=0), pts[:, :2].max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    margin = 20
    scale = (size - 2 * margin) / span

    def xy(p):
        x = margin + (p[0] - lo[0]) * scale[0]
        y = size - margin - (p[1] - lo[1]) * scale[1]
        return x, y

    k = max(colors) + 1 if len(colors) else 1
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">']
    lines.append(f'<rect width="{size}" height="{size}" fill="white"/>')
    if order:
        coords = " ".join("%.2f,%.2f" % xy(pts[v]) for v in list(order) + [order[0]])
        lines.append(f'<polyline points="{coords}" fill="none" stroke="#444" stroke-width="1"/>')
    for v, p in enumerate(pts):
        x, y = xy(p)
        hue = int(360 * colors[v] / k)
        lines.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="hsl({hue},70%,45%)"><title>{v}: class {colors[v]}</title></circle>')
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n")


# ------------------------------------------------------------------ commands


def cmd_solve(args) -> int:
    inst = _read_instance(args.instance)
    sigma = None if args.order == "auto" else _read_sigma(args.order, inst.k)
    try:
        if sigma is None:
            report = solve(inst, args.sub_order, args.sub_glue, strict=args.require_guarantee)
        else:
            if args.require_guarantee and not check_metric(inst).is_metric:
                raise NonMetricError("instance violates the triangle inequality")
            report = fixed_order_tour(inst, sigma, args.sub_glue)
    except NonMetricError as exc:
        raise CliExit(EXIT_CONSTRAINT, str(exc)) from None
    except VerificationError as exc:
        raise CliExit(EXIT_INTERNAL, str(exc)) from None

    verdict = verify_sigma_tour(inst, report.tour)
    if not verdict.ok:
        raise CliExit(EXIT_INTERNAL, f"output tour failed verification: {verdict.reason}")
    print(f"cost {report.tour.cost:.10f}")
    print(f"sigma {' '.join(map(str, report.sigma.sigma))}")
    print(f"matching_total {report.matching_total:.10f}")
    print(f"glue_overhead {report.glue_overhead:.10f}")
    print(f"components {len(report.components)}")
    print(f"subroutines {report.subroutine_names[0]} {report.subroutine_names[1]}")
    print(f"guarantee {_fmt_guarantee(report.guarantee)}")
    if args.out:
        save_tour(report.tour, args.out)
    if args.svg:
        if inst.kind != "euclidean":
            raise CliExit(EXIT_INPUT, "--svg needs a euclidean instance")
        write_svg(args.svg, inst.points, inst.colors, report.tour.order)
    return EXIT_OK


def cmd_exact(args) -> int:
    inst = _read_instance(args.instance)
    res = solve_exact(inst, budget=args.budget)
    if res.tour is None:
        print(f"no tour found within budget ({res.explored} nodes)")
        return EXIT_CONSTRAINT
    print(f"cost {res.cost:.10f}")
    print(f"sigma {' '.join(map(str, res.sigma.sigma))}")
    print(f"explored {res.explored}")
    print(f"optimal {'yes' if res.optimal else 'no (budget exhausted)'}")
    if args.out:
        save_tour(res.tour, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = _read_instance(args.instance)
    try:
        tour = load_tour(args.tour, inst)
    except FileNotFoundError:
        raise CliExit(EXIT_INPUT, f"{args.tour}: no such file") from None
    except InstanceError as exc:
        raise CliExit(EXIT_INPUT, str(exc)) from None
    verdict = verify_sigma_tour(inst, tour)
    if not verdict.ok:
        print(f"not ok: {verdict.reason}")
        return EXIT_CONSTRAINT
    print("ok")
    print(f"sigma {' '.join(map(str, verdict.sigma.sigma))}")
    print(f"cost {tour.cost:.10f}")
    return EXIT_OK


def cmd_gen_random(args) -> int:
    try:
        if args.kind == "euclidean":
            inst = bench.gen_random_euclidean(args.n, args.k, args.seed, box=args.box)
        else:
            inst = bench.gen_random_metric(args.n, args.k, args.seed)
    except InstanceError as exc:
        raise CliExit(EXIT_INPUT, str(exc)) from None
    if args.out:
        save_instance(inst, args.out)
    else:
        print(json.dumps(inst.to_dict()))
    return EXIT_OK


def cmd_check_metric(args) -> int:
    inst = _read_instance(args.instance)
    rep = check_metric(inst, args.tol)
    print(f"is_metric {'yes' if rep.is_metric else 'no'}")
    print(f"worst_violation {rep.worst_violation:.3e}")
    return EXIT_OK if rep.is_metric else EXIT_CONSTRAINT


def cmd_gen_reduction(args) -> int:
    try:
        sat = hardness.load_2sat(args.sat)
    except FileNotFoundError:
        raise CliExit(EXIT_INPUT, f"{args.sat}: no such file") from None
    except hardness.ReductionError as exc:
        raise CliExit(EXIT_INPUT, f"{args.sat}: {exc}") from None
    try:
        layout = hardness.build_layout(sat, a=args.a, b=args.b)
    except hardness.ReductionError as exc:
        raise CliExit(EXIT_CONSTRAINT, f"parameter constraint violated: {exc}") from None

    p = layout.params
    print(f"n {sat.n_vars} m {sat.m} k {layout.instance.k} points {layout.n_points}")
    print(f"a {p.a:g} b {p.b:g} l {p.l:.6f} W {p.W:.6f} c {p.c:.6f}")
    if args.out:
        inst_path, side_path = hardness.save_layout(layout, args.out)
        print(f"wrote {inst_path} {side_path}")
    if sat.n_vars <= 10:
        try:
            rows = hardness.certify_all(layout)
        except RuntimeError as exc:
            raise CliExit(EXIT_INTERNAL, str(exc)) from None
        print("assignment k_sat f(k_sat) tour_length match")
        for row in rows:
            bits = "".join("1" if b else "0" for b in row.assign)
            print(f"{bits} {row.k_sat} {row.formula:.6f} {row.tour_length:.6f} {'yes' if row.match else 'no'}")
        if not all(r.match for r in rows):
            return EXIT_INTERNAL
    if args.svg:
        best = None
        if sat.n_vars <= 10:
            best = max(rows, key=lambda r: r.k_sat).assign
        order = hardness.constructive_tour(layout, best).order if best is not None else None
        write_svg(args.svg, layout.instance.points, layout.instance.colors, order)
    return EXIT_OK


def _parse_clause(text: str) -> tuple[int, int]:
    parts = text.replace(",", " ").split()
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("clause needs two literals, e.g. '1 -2'")
    return int(parts[0]), int(parts[1])


def cmd_gadget_table(args) -> int:
    if args.n < 2:
        raise CliExit(EXIT_INPUT, "--n must be at least 2")
    try:
        rows = hardness.gadget_table(args.a, args.n, args.clause)
    except hardness.ReductionError as exc:
        raise CliExit(EXIT_INPUT, str(exc)) from None
    base = min(r.length for r in rows)
    print("case length expected difference projection")
    for r in rows:
        print(f"{r.case} {r.length:.9f} {r.expected:.9f} {r.length - base:.9f} {r.projection:.6f}")
    return EXIT_OK


def cmd_ratio_study(args) -> int:
    cfg = bench.StudyConfig(
        sizes=args.sizes, ks=args.ks, trials=args.trials, sub_order=args.sub_order, sub_glue=args.sub_glue,
        oracle_cap=args.oracle_cap, kind=args.kind, base_seed=args.seed,
    )
    records = bench.run_ratio_study(cfg)
    text = bench.records_to_csv(records)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    for row in bench.summarize(records):
        mx = "-" if row["max_ratio"] is None else f"{row['max_ratio']:.6f}"
        mean = "-" if row["mean_ratio"] is None else f"{row['mean_ratio']:.6f}"
        print(f"# n={row['n']} k={row['k']} count={row['count']} max_ratio={mx} mean_ratio={mean}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pctsp", description="Polychromatic TSP toolkit")
    sub = ap.add_subparsers(dest="command", required=True)
    subs = sorted(SUBROUTINES)

    p = sub.add_parser("solve", help="approximate a polychromatic tour")
    p.add_argument("instance")
    p.add_argument("--order", default="auto", help="'auto' or a JSON file holding a class order")
    p.add_argument("--sub-order", default="auto", choices=subs)
    p.add_argument("--sub-glue", default="auto", choices=subs)
    p.add_argument("--require-guarantee", action="store_true", help="fail with exit 3 on non-metric input")
    p.add_argument("--out")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("exact", help="brute-force optimum for small instances")
    p.add_argument("instance")
    p.add_argument("--budget", type=int, default=50_000_000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("verify", help="check a tour file against an instance")
    p.add_argument("instance")
    p.add_argument("tour")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen-random", help="random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--kind", choices=["euclidean", "metric"], default="euclidean")
    p.add_argument("--box", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_random)

    p = sub.add_parser("gen-reduction", help="Max 2-SAT reduction instance")
    p.add_argument("sat")
    p.add_argument("--a", type=float, default=15.0)
    p.add_argument("--b", type=float, default=None, help="default 200a")
    p.add_argument("--out", help="output prefix")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_gen_reduction)

    p = sub.add_parser("gadget-table", help="lengths of the four candidate gadget paths")
    p.add_argument("--a", type=float, default=15.0)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--clause", type=_parse_clause, default=(1, 2))
    p.set_defaults(func=cmd_gadget_table)

    p = sub.add_parser("ratio-study", help="approximation ratios against the exact oracle")
    p.add_argument("--sizes", type=int, nargs="+", default=[6, 8, 10])
    p.add_argument("--ks", type=int, nargs="+", default=[2, 3, 5])
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--sub-order", default="exact", choices=subs)
    p.add_argument("--sub-glue", default="exact", choices=subs)
    p.add_argument("--oracle-cap", type=int, default=10)
    p.add_argument("--kind", choices=["euclidean", "metric"], default="euclidean")
    p.add_argument("--seed", type=int, required=True, help="base seed; trial t uses seed + t")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ratio_study)

    p = sub.add_parser("check-metric", help="triangle-inequality check")
    p.add_argument("instance")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_check_metric)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CliExit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
