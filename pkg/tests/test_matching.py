import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import all_optimal_assignments, brute_assignment, triangle_worst
from pctsp.bench import gen_random_metric
from pctsp.instance import Instance, InstanceError, check_metric
from pctsp.matching import hungarian, matching_cost_matrix, min_cost_matching, solve_assignment


def test_collinear_example():
    # class 0 at x=0,2 ; class 1 at x=1,3 ; crossing matching costs 4
    inst = Instance.euclidean([(0,), (1,), (2,), (3,)], [0, 1, 0, 1])
    m = min_cost_matching(inst, 0, 1)
    assert m.pairs == ((0, 1), (2, 3))
    assert m.cost == pytest.approx(2.0, abs=1e-12)
    assert brute_assignment([[1, 3], [1, 1]])[0] == 2.0


def test_zero_diagonal_cost():
    assign, total = solve_assignment(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert assign == [0, 1] and total == 0.0


def test_tie_goes_to_lexicographically_smallest():
    # both matchings cost 5
    assign, total = solve_assignment(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert total == 5.0 and assign == [0, 1]
    assign, total = solve_assignment(np.ones((4, 4)))
    assert assign == [0, 1, 2, 3]


def test_same_class_rejected():
    inst = Instance.euclidean([(0, 0), (1, 0)], [0, 1])
    with pytest.raises(InstanceError):
        min_cost_matching(inst, 0, 0)


def test_singleton_classes_matrix():
    inst = Instance.euclidean([(0, 0), (1, 0), (0, 1)], [0, 1, 2])
    M = matching_cost_matrix(inst)
    expect = np.array([[0, 1, 1], [1, 0, math.sqrt(2)], [1, math.sqrt(2), 0]])
    assert np.allclose(M, expect, atol=1e-12)


def test_k2_matrix_single_entry(square_k2):
    M = matching_cost_matrix(square_k2)
    assert M.shape == (2, 2)
    assert M[0, 1] == M[1, 0] == pytest.approx(min_cost_matching(square_k2, 0, 1).cost)
    assert M[0, 0] == M[1, 1] == 0


def test_coincident_points_zero_matrix():
    inst = Instance.euclidean(np.zeros((9, 2)), [0, 1, 2] * 3)
    assert np.all(matching_cost_matrix(inst) == 0)


def test_hungarian_duals_are_feasible():
    cost = np.random.default_rng(3).random((7, 7))
    assign, u, v = hungarian(cost)
    red = cost - u[:, None] - v[None, :]
    assert red.min() >= -1e-12
    assert np.allclose(red[np.arange(7), assign], 0, atol=1e-12)


@settings(max_examples=150, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6)).map(lambda t: (t[0], t[0])), elements=st.floats(0, 100)))
def test_matches_brute_force(cost):
    assign, total = solve_assignment(cost)
    best, _ = brute_assignment(cost)
    assert total == pytest.approx(best, abs=1e-9)
    assert sorted(assign) == list(range(cost.shape[0]))


@settings(max_examples=150, deadline=None)
@given(arrays(np.int64, st.tuples(st.integers(1, 6)).map(lambda t: (t[0], t[0])), elements=st.integers(0, 3)))
def test_integer_ties_lexicographic(cost):
    # small integer ranges produce many tied optima
    assign, total = solve_assignment(cost.astype(float))
    best, optima = all_optimal_assignments(cost)
    assert total == best
    assert tuple(assign) == optima[0]


def test_matching_matrix_is_metric_on_metric_inputs():
    for seed in range(20):
        inst = gen_random_metric(12, 4, seed)
        M = matching_cost_matrix(inst)
        assert check_metric(M).is_metric
        assert triangle_worst(M) <= 1e-9


def test_deterministic():
    inst = gen_random_metric(12, 3, 7)
    a = [min_cost_matching(inst, 0, 2) for _ in range(3)]
    assert a[0] == a[1] == a[2]
