import numpy as np
import pytest

from quadfree.errors import UnboundedLPError
from quadfree.lp import InfeasibleLPError, solve_lp


def test_simple_box_minimum():
    # min s1 + s2  s.t.  −s1 ≤ 3, −s2 ≤ 1, s1 ≤ 10, s2 ≤ 10
    c = np.array([1.0, 1.0])
    A = np.array([[-1.0, 0.0], [0.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    b = np.array([3.0, 1.0, 10.0, 10.0])
    s, value = solve_lp(c, A, b)
    assert np.allclose(s, [-3.0, -1.0], atol=1e-9)
    assert value == pytest.approx(-4.0, abs=1e-9)


def test_maximization_via_negation():
    c = np.array([-2.0, -3.0])
    A = np.array([[1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
    b = np.array([4.0, 3.0, 3.0])
    s, value = solve_lp(c, A, b)
    # max 2s1+3s2 over the triangle: optimum at (1, 3)
    assert np.allclose(s, [1.0, 3.0], atol=1e-9)
    assert value == pytest.approx(-11.0, abs=1e-9)


def test_negative_rhs_handled():
    # feasible region s1 ≥ 2 (written −s1 ≤ −2), s1 ≤ 5
    c = np.array([1.0])
    A = np.array([[-1.0], [1.0]])
    b = np.array([-2.0, 5.0])
    s, value = solve_lp(c, A, b)
    assert s[0] == pytest.approx(2.0, abs=1e-9)


def test_unbounded_detected():
    c = np.array([-1.0, 0.0])
    A = np.array([[-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    b = np.array([0.0, 1.0, 1.0])
    with pytest.raises(UnboundedLPError):
        solve_lp(c, A, b)


def test_infeasible_detected():
    c = np.array([1.0])
    A = np.array([[1.0], [-1.0]])
    b = np.array([1.0, -2.0])  # s ≤ 1 and s ≥ 2
    with pytest.raises(InfeasibleLPError):
        solve_lp(c, A, b)


def test_matches_bruteforce_vertex_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = 2
        A = np.vstack([rng.standard_normal((4, p)), np.eye(p), -np.eye(p)])
        b = np.concatenate([rng.uniform(0.5, 2.0, 4), np.full(2 * p, 5.0)])
        c = rng.standard_normal(p)
        s, value = solve_lp(c, A, b)
        assert np.max(A @ s - b) <= 1e-8
        # enumerate all vertices of the polygon
        best = np.inf
        k = A.shape[0]
        for i in range(k):
            for j in range(i + 1, k):
                M = A[[i, j]]
                if abs(np.linalg.det(M)) < 1e-10:
                    continue
                v = np.linalg.solve(M, b[[i, j]])
                if np.max(A @ v - b) <= 1e-8:
                    best = min(best, float(c @ v))
        assert value == pytest.approx(best, abs=1e-7)
