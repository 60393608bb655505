import numpy as np
import pytest

from gptpurity import simplex

from oracles import hull_membership_scipy


def test_phase1_simple_feasible():
    a = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    b = np.array([0.5, 0.5, 1.0])
    feasible, x, _ = simplex.phase1(a, b)
    assert feasible
    np.testing.assert_allclose(a @ x, b, atol=1e-10)


def test_phase1_simple_infeasible():
    # x1 = 2 with x1 + x2 = 1, x >= 0 has no solution
    a = np.array([[1.0, 0.0], [1.0, 1.0]])
    b = np.array([2.0, 1.0])
    feasible, _, y = simplex.phase1(a, b)
    assert not feasible
    # Farkas: y.A <= 0 while y.b > 0
    assert np.max(y @ a) <= 1e-9
    assert y @ b > 1e-9


def test_phase1_agrees_with_scipy_on_random_hulls():
    rng = np.random.default_rng(42)
    for _ in range(200):
        dim = rng.integers(2, 5)
        n_gen = rng.integers(dim, 3 * dim)
        gens = rng.normal(size=(dim, n_gen))
        if rng.random() < 0.5:
            weights = rng.dirichlet(np.ones(n_gen))
            target = gens @ weights  # inside by construction
        else:
            target = rng.normal(size=dim)
        a = np.vstack([gens, np.ones(n_gen)])
        b = np.concatenate([target, [1.0]])
        feasible, x, _ = simplex.phase1(a, b)
        assert feasible == hull_membership_scipy(gens.T.tolist(), target)
        if feasible:
            np.testing.assert_allclose(a @ x, b, atol=1e-8)


def test_solve_runs_phase2_from_slack_basis():
    # maximize x1 + x2 over the unit square via slack form
    a = np.array([[1.0, 0.0, 1.0, 0.0],
                  [0.0, 1.0, 0.0, 1.0]])
    b = np.array([1.0, 1.0])
    c = np.array([-1.0, -1.0, 0.0, 0.0])
    x, val = simplex.solve(a, b, c, basis=[2, 3])
    assert abs(val + 2.0) < 1e-10
    np.testing.assert_allclose(x[:2], [1.0, 1.0], atol=1e-10)


def test_solve_detects_unbounded():
    a = np.array([[1.0, -1.0, 1.0]])
    b = np.array([1.0])
    c = np.array([0.0, -1.0, 0.0])
    with pytest.raises(simplex.UnboundedError):
        simplex.solve(a, b, c, basis=[2])


def test_degenerate_pivoting_terminates():
    # many redundant constraints through the origin; Bland's rule must not cycle
    rng = np.random.default_rng(1)
    for _ in range(50):
        a = np.vstack([rng.normal(size=(3, 6)), rng.normal(size=(2, 6))])
        a[:, -1] = 0.0
        b = np.zeros(5)
        feasible, x, _ = simplex.phase1(a, b)
        assert feasible
        np.testing.assert_allclose(a @ x, b, atol=1e-9)
