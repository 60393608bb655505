"""Dense simplex solver for small equality-form linear programs.

Solves   min c.x   s.t.   A x = b,  x >= 0   with a tableau simplex using
Bland's anti-cycling rule, so the pivot sequence (and hence the returned
vertex) is deterministic.  Problems here have at most a few dozen rows and
a few hundred columns, so an O(m*n) dense pivot is the right trade-off.

``phase1`` answers pure feasibility questions (the convex-combination
certificates); ``solve`` runs phase 2 from a caller-supplied starting basis
(used for optimizing over the effect polytope, where the slack basis is
feasible by construction).
"""

from __future__ import annotations

import numpy as np

PIVOT_TOL = 1e-10
MAX_ITER = 20000


class SimplexError(RuntimeError):
    """Iteration cap exceeded or an internally inconsistent tableau."""


class UnboundedError(SimplexError):
    """The objective is unbounded below on the feasible region."""


def _pivot(tableau: np.ndarray, basis: list[int], row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    piv = tableau[row]
    for i in range(tableau.shape[0]):
        if i != row and abs(tableau[i, col]) > 0.0:
            tableau[i] -= tableau[i, col] * piv
    basis[row] = col


def _run(tableau: np.ndarray, basis: list[int], cost: np.ndarray,
         allowed: np.ndarray) -> None:
    """Drive the tableau to optimality in place (Bland's rule).

    ``tableau`` is m x (n+1) with the right-hand side in the last column and
    a feasible basis installed (identity columns).  ``allowed`` masks the
    columns that may enter the basis.
    """
    m = tableau.shape[0]
    for _ in range(MAX_ITER):
        # reduced costs r = c - c_B . B^-1 A, using the current tableau rows
        cb = cost[basis]
        reduced = cost[:-1] - cb @ tableau[:, :-1]
        entering = -1
        for j in np.flatnonzero(allowed):
            if reduced[j] < -PIVOT_TOL:
                entering = j  # Bland: smallest admissible index
                break
        if entering < 0:
            return
        ratios = np.full(m, np.inf)
        col = tableau[:, entering]
        ok = col > PIVOT_TOL
        ratios[ok] = tableau[ok, -1] / col[ok]
        best = np.min(ratios)
        if not np.isfinite(best):
            raise UnboundedError("objective unbounded along entering column")
        # Bland tie-break: among minimizing rows, leave the smallest basis index
        rows = np.flatnonzero(np.isclose(ratios, best, rtol=0.0, atol=PIVOT_TOL))
        leave = rows[np.argmin([basis[r] for r in rows])]
        _pivot(tableau, basis, int(leave), int(entering))
    raise SimplexError("simplex iteration cap exceeded")


def phase1(a: np.ndarray, b: np.ndarray) -> tuple[bool, np.ndarray, np.ndarray]:
    """Find x >= 0 with A x = b, or certify that none exists.

    Returns ``(feasible, x, y)``.  When infeasible, ``y`` is a Farkas
    certificate for the original system: y.A <= 0 componentwise while
    y.b > 0, built from the simplex multipliers at the phase-1 optimum.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    m, n = a.shape
    sign = np.where(b < 0, -1.0, 1.0)
    tableau = np.empty((m, n + m + 1))
    tableau[:, :n] = a * sign[:, None]
    tableau[:, n:n + m] = np.eye(m)
    tableau[:, -1] = b * sign
    cost = np.zeros(n + m + 1)
    cost[n:n + m] = 1.0
    basis = list(range(n, n + m))
    allowed = np.ones(n + m, dtype=bool)
    _run(tableau, basis, cost, allowed)
    x = np.zeros(n + m)
    x[basis] = tableau[:, -1]
    objective = float(np.sum(x[n:]))
    # simplex multipliers: the artificial block of the tableau is B^-1
    y = (cost[basis] @ tableau[:, n:n + m]) * sign
    return objective <= 1e-9, x[:n], y


def solve(a: np.ndarray, b: np.ndarray, c: np.ndarray,
          basis: list[int]) -> tuple[np.ndarray, float]:
    """Phase-2 simplex: min c.x from a given feasible basis.

    ``basis`` must index an identity submatrix of ``a`` with b >= 0 (e.g. a
    full set of slack columns).  Returns the optimal x and objective.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    if np.any(b < -PIVOT_TOL):
        raise SimplexError("starting basis is not feasible (negative rhs)")
    m, n = a.shape
    tableau = np.empty((m, n + 1))
    tableau[:, :n] = a
    tableau[:, -1] = np.maximum(b, 0.0)
    cost = np.concatenate([np.asarray(c, dtype=float), [0.0]])
    basis = list(basis)
    allowed = np.ones(n, dtype=bool)
    _run(tableau, basis, cost, allowed)
    x = np.zeros(n)
    x[basis] = tableau[:, -1]
    return x, float(cost[:-1] @ x)
