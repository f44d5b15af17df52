"""Independent brute-force oracles used to validate the simplex solver.

Everything here deliberately avoids the package's own factorisation and
pivoting code: bases are enumerated exhaustively and solved with
numpy.linalg, so agreement with ``tsagg.solve`` is a genuine two-route
check rather than the same algorithm run twice.
"""

from __future__ import annotations

import itertools

import numpy as np


def _basic_solution(A, b, cols, res_tol=1e-7):
    """Solve the square basis system for ``cols``; None when unusable."""
    B = A[:, cols]
    try:
        xb = np.linalg.solve(B, b)
    except np.linalg.LinAlgError:
        return None
    if not np.isfinite(xb).all():
        return None
    # Guard against near-singular bases whose "solution" is garbage.
    if np.abs(B @ xb - b).max() > res_tol * (1.0 + np.abs(xb).max()):
        return None
    return xb


def enumerate_lp(c, A, b, feas_tol=1e-9):
    """Classify min c.x s.t. Ax=b, x>=0 by exhaustive basis enumeration.

    Returns (status, objective, x) with status in
    {"optimal", "infeasible", "unbounded"}.  Assumes rank(A) == m.  The
    feasible case relies on the fundamental theorem of LP (an attained
    optimum sits at a basic feasible solution); unboundedness is decided
    by enumerating the normalised recession problem
    min c.d s.t. Ad = 0, sum(d) = 1, d >= 0, whose feasible set is compact.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape

    best = None
    best_x = None
    for cols in itertools.combinations(range(n), m):
        xb = _basic_solution(A, b, list(cols))
        if xb is None:
            continue
        if xb.min(initial=np.inf) < -feas_tol:
            continue
        obj = float(c[list(cols)] @ xb)
        if best is None or obj < best:
            best = obj
            x = np.zeros(n)
            x[list(cols)] = xb
            best_x = x
    if best is None:
        return "infeasible", None, None

    A2 = np.vstack([A, np.ones(n)])
    b2 = np.append(np.zeros(m), 1.0)
    scale = max(1.0, np.abs(c).max())
    for cols in itertools.combinations(range(n), m + 1):
        if m + 1 > n:
            break
        d = _basic_solution(A2, b2, list(cols))
        if d is None:
            continue
        if d.min(initial=np.inf) < -feas_tol:
            continue
        if float(c[list(cols)] @ d) < -1e-9 * scale:
            return "unbounded", None, None
    return "optimal", best, best_x


def random_lp_data(rng, max_m=5, max_n=10):
    """Random standard-form data with a healthy optimal/infeasible/unbounded mix."""
    m = int(rng.integers(1, max_m + 1))
    n = int(rng.integers(m, max_n + 1))
    A = rng.normal(size=(m, n))
    if rng.integers(2) == 0:
        x0 = rng.uniform(0.0, 1.0, n)
        b = A @ x0  # feasible by construction
    else:
        b = rng.normal(size=m)
    if rng.integers(2) == 0:
        c = rng.uniform(0.0, 1.0, n)  # bounded below whenever feasible
    else:
        c = rng.normal(size=n)
    return c, A, b
