"""Exit criteria, one test per criterion, tolerances fixed here."""

import itertools
import math
import time

import numpy as np
import pytest

from oracles import brute_assignment, brute_tsp
from pctsp.bench import gen_random_euclidean, gen_random_metric
from pctsp.hardness import (
    R,
    build_gadget,
    build_layout,
    certify_all,
    constructive_tour,
    gadget_case,
    gadget_constant,
    gadget_table,
    is_valid_sigma,
    random_2sat,
    sigma_from_assignment,
)
from pctsp.instance import check_metric, verify_sigma_tour
from pctsp.matching import matching_cost_matrix, min_cost_matching
from pctsp.oracle import shortest_sigma_path, solve_exact
from pctsp.solver import sigma_matchings, solve
from pctsp.tsp import tsp_exact

TOL = 1e-9

# n <= 10, k dividing n; k = n kept small so the oracle stays fast
SMALL_CELLS = [(4, 2), (6, 2), (6, 3), (8, 2), (8, 4), (9, 3), (10, 2), (10, 5), (6, 6), (7, 7)]


@pytest.fixture(scope="module")
def small_runs():
    """Instances with oracle optimum and both subroutine configurations solved."""
    runs = []
    seed = 0
    for kind, gen in (("euclidean", gen_random_euclidean), ("metric", gen_random_metric)):
        for _ in range(16):
            for n, k in SMALL_CELLS:
                inst = gen(n, k, seed)
                seed += 1
                opt = solve_exact(inst)
                runs.append({
                    "kind": kind,
                    "inst": inst,
                    "opt": opt,
                    "exact": solve(inst, "exact", "exact"),
                    "dtree": solve(inst, "double-tree", "double-tree"),
                })
    return runs


def test_ac1_structural_validity(acceptance_report):
    acceptance_report["name"] = "AC1 structural validity (1000 euclidean, n in 6..60, k in {2,3,5,6})"
    rng = np.random.default_rng(20241016)
    ks = (2, 3, 5, 6)
    t0 = time.perf_counter()
    bad = []
    for i in range(1000):
        k = ks[i % 4]
        n = k * int(rng.integers(math.ceil(6 / k), 60 // k + 1))
        inst = gen_random_euclidean(n, k, 1000 + i)
        rep = solve(inst)
        v = verify_sigma_tour(inst, rep.tour)
        if not v.ok or not v.sigma.same_cycle(rep.sigma):
            bad.append((n, k, 1000 + i, v.reason))
    elapsed = time.perf_counter() - t0
    acceptance_report["detail"] = f"{1000 - len(bad)}/1000 verified in {elapsed:.1f}s"
    assert not bad
    assert elapsed < 60


def test_ac2_two_alpha_bound(small_runs, acceptance_report):
    acceptance_report["name"] = "AC2 2-alpha bound vs oracle (n <= 10)"
    assert all(r["opt"].optimal for r in small_runs)
    assert len(small_runs) >= 300
    r_exact = max(r["exact"].tour.cost / r["opt"].cost for r in small_runs if r["opt"].cost > 0)
    r_dtree = max(r["dtree"].tour.cost / r["opt"].cost for r in small_runs if r["opt"].cost > 0)
    floor = min(r["opt"].cost for r in small_runs)
    acceptance_report["detail"] = (
        f"{len(small_runs)} instances; max ratio exact={r_exact:.6f} (<= 2), double-tree={r_dtree:.6f} (<= 4)"
    )
    assert floor > 0
    assert r_exact <= 2 + TOL
    assert r_dtree <= 4 + TOL
    assert all(r["exact"].guarantee == 2.0 for r in small_runs)


def test_ac3_matching_lower_bound(small_runs, acceptance_report):
    acceptance_report["name"] = "AC3 sigma-aligned matching sum <= oracle cost"
    worst = -math.inf
    for r in small_runs:
        total = sum(m.cost for m in sigma_matchings(r["inst"], r["opt"].sigma))
        worst = max(worst, total - r["opt"].cost)
    acceptance_report["detail"] = f"max(matching sum - opt) = {worst:.3e} over {len(small_runs)} instances"
    assert worst <= TOL


def test_ac4_glue_decomposition(small_runs, acceptance_report):
    acceptance_report["name"] = "AC4 tour = matchings + glue, glue <= representative tour"
    reports = [r[key] for r in small_runs for key in ("exact", "dtree")]
    for seed in range(200):
        k = (2, 3, 5, 6)[seed % 4]
        reports.append(solve(gen_random_metric(k * (1 + seed % 8), k, 5000 + seed)))
        reports.append(solve(gen_random_euclidean(k * (1 + seed % 9), k, 6000 + seed)))
    ident = max(abs(rep.tour.cost - rep.matching_total - rep.glue_overhead) for rep in reports)
    glue = max(rep.glue_overhead - rep.representative_tour_cost for rep in reports)
    acceptance_report["detail"] = f"{len(reports)} runs; max identity gap {ident:.2e}, max glue excess {glue:.2e}"
    assert ident <= TOL
    assert glue <= TOL


def test_ac5_meta_graph_metric(acceptance_report):
    acceptance_report["name"] = "AC5 matching-cost class graph is metric"
    worst = 0.0
    for seed in range(200):
        k = (3, 4, 5, 6)[seed % 4]
        inst = gen_random_metric(k * (1 + seed % 4), k, 7000 + seed)
        rep = check_metric(matching_cost_matrix(inst))
        worst = max(worst, rep.worst_violation)
        assert rep.is_metric
    acceptance_report["detail"] = f"200 instances; worst violation {worst:.2e}"


def test_ac6_gadget_lengths(acceptance_report):
    acceptance_report["name"] = "AC6 gadget path lengths and exhaustive minima (a=15, 20)"
    details = []
    for a in (15.0, 20.0):
        c = gadget_constant(a)
        rows = {r.case: r.length for r in gadget_table(a)}
        for case in ("TF", "FT", "TT"):
            assert abs(rows[case] - (c + 2 * a)) <= TOL
        assert abs(rows["FF"] - (c + 2 * math.sqrt(a * a + 4))) <= TOL
        for clause in ((1, 2), (-1, 2), (1, -2), (-1, -2)):
            pl = build_gadget(clause, 0.0, a, 2)
            pts = np.array([p.point for p in pl])
            cols = [p.color for p in pl]
            for bits in itertools.product([False, True], repeat=2):
                best, _ = shortest_sigma_path(pts, cols, sigma_from_assignment(bits))
                expect = c + (2 * a if any(gadget_case(clause, bits)) else 2 * math.sqrt(a * a + 4))
                assert abs(best - expect) <= TOL
        details.append(f"a={a:g}: c+2a={c + 2 * a:.9f}, FF={rows['FF']:.9f}")
    acceptance_report["detail"] = "; ".join(details)


def test_ac7_full_construction_length(acceptance_report):
    acceptance_report["name"] = "AC7 constructive tour length = f(k_sat) (n <= 3, m in 2..4)"
    rng = np.random.default_rng(7)
    worst = 0.0
    count = 0
    for n in (2, 3):
        for m in (2, 3, 4):
            for _ in range(5):
                sat = random_2sat(n, m, rng)
                layout = build_layout(sat)
                for row in certify_all(layout):
                    tour = constructive_tour(layout, row.assign)
                    v = verify_sigma_tour(layout.instance, tour)
                    assert v.ok and v.sigma == sigma_from_assignment(row.assign)
                    rel = abs(row.tour_length - row.formula) / row.formula
                    worst = max(worst, rel)
                    count += 1
    acceptance_report["detail"] = f"{count} tours; worst relative error {worst:.2e}"
    assert worst <= 1e-6


def test_ac8_valid_permutation_count(acceptance_report):
    acceptance_report["name"] = "AC8 exactly 2^n valid orders (n=1)"
    perms = list(itertools.permutations(range(4)))
    valid = [p for p in perms if is_valid_sigma(p, 1)]
    images = {sigma_from_assignment(b).sigma for b in itertools.product([False, True], repeat=1)}
    acceptance_report["detail"] = f"{len(valid)} valid of {len(perms)}, all start with R_1"
    assert len(perms) == 24
    assert len(valid) == 2
    assert all(p[0] == R(1) for p in valid)
    assert images == set(valid)


def test_ac9_matching_optimality(acceptance_report):
    acceptance_report["name"] = "AC9 min-cost matching = s! brute force"
    rng = np.random.default_rng(9)
    worst = 0.0
    for trial in range(500):
        s = int(rng.integers(1, 7))
        k = int(rng.integers(2, 5))
        gen = gen_random_euclidean if trial % 2 else gen_random_metric
        inst = gen(s * k, k, 9000 + trial)
        a, b = rng.choice(k, size=2, replace=False)
        m = min_cost_matching(inst, int(a), int(b))
        block = inst.dist[np.ix_(inst.members(int(a)), inst.members(int(b)))]
        best, _ = brute_assignment(block)
        worst = max(worst, abs(m.cost - best))
    acceptance_report["detail"] = f"500 pairs; max |diff| {worst:.2e}"
    assert worst <= TOL


def test_ac10_held_karp(acceptance_report):
    acceptance_report["name"] = "AC10 Held-Karp = (m-1)!/2 enumeration (m <= 8)"
    rng = np.random.default_rng(10)
    worst = 0.0
    for trial in range(200):
        m = int(rng.integers(1, 9))
        size = max(m, 2)
        d = gen_random_metric(size, size, 11000 + trial).dist[:m, :m]
        worst = max(worst, abs(tsp_exact(d).cost - brute_tsp(d)))
    acceptance_report["detail"] = f"200 matrices; max |diff| {worst:.2e}"
    assert worst <= TOL
