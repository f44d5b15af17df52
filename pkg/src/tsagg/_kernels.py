"""Dense simplex and basis-evaluation kernels.

Two interchangeable backends solve the same standard-form LPs:

* ``numba`` -- explicit-loop kernels compiled with ``@njit`` (used when
  numba is importable, unless disabled).
* ``numpy`` -- a vectorised pure-numpy pivot loop plus plain-Python
  factorisation helpers.

The backend is fixed at import time from the ``TSAGG_NUMBA`` environment
variable: ``0``/``off``/``numpy`` forces the numpy path, ``1``/``numba``
requires numba (ImportError if missing), anything else auto-detects.

Both backends execute the identical pivot sequence: every comparison is
made on floats produced by the same elementwise operations in the same
order, so statuses and bases agree exactly between them (the cross-backend
tests assert this).  Kernels return integer status codes; the public
wrappers in ``lp_core`` translate them into exceptions and enums.
"""

from __future__ import annotations

import os

import numpy as np

# Kernel status codes.
OPTIMAL = 0
INFEASIBLE = 1
UNBOUNDED = 2
RANK_DEFICIENT = 3
NUMERICAL = 4

_env = os.environ.get("TSAGG_NUMBA", "auto").strip().lower()

try:
    from numba import njit as _njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

if _env in ("1", "true", "on", "numba") and not HAS_NUMBA:
    raise ImportError("TSAGG_NUMBA requests numba but numba is not installed")

_USE_NUMBA = HAS_NUMBA and _env not in ("0", "false", "off", "no", "numpy")

if _USE_NUMBA:
    _jit = _njit(cache=True, nogil=True)
    BACKEND = "numba"
else:
    def _jit(func):
        return func

    BACKEND = "numpy"


# ---------------------------------------------------------------------------
# Shared factorisation helpers (loop form; compiled under the numba backend).
# ---------------------------------------------------------------------------

@_jit
def _lu_factor(M, perm, pivot_eps):
    """LU-factorise square M in place with partial pivoting.

    ``perm`` records the row swap made at each elimination step.  Returns
    False as soon as the best available pivot magnitude drops below
    ``pivot_eps`` (near-singular matrix).
    """
    m = M.shape[0]
    for k in range(m):
        p = k
        best = abs(M[k, k])
        for i in range(k + 1, m):
            v = abs(M[i, k])
            if v > best:
                best = v
                p = i
        if best < pivot_eps:
            return False
        perm[k] = p
        if p != k:
            for j in range(m):
                t = M[k, j]
                M[k, j] = M[p, j]
                M[p, j] = t
        piv = M[k, k]
        for i in range(k + 1, m):
            l = M[i, k] / piv
            M[i, k] = l
            for j in range(k + 1, m):
                M[i, j] -= l * M[k, j]
    return True


@_jit
def _lu_solve(LU, perm, rhs):
    m = LU.shape[0]
    x = rhs.copy()
    for k in range(m):
        p = perm[k]
        if p != k:
            t = x[k]
            x[k] = x[p]
            x[p] = t
    for i in range(1, m):
        s = x[i]
        for j in range(i):
            s -= LU[i, j] * x[j]
        x[i] = s
    for i in range(m - 1, -1, -1):
        s = x[i]
        for j in range(i + 1, m):
            s -= LU[i, j] * x[j]
        x[i] = s / LU[i, i]
    return x


@_jit
def basis_eval(c, A, b, basis, pivot_eps):
    """Evaluate a basis B = A[:, basis]: x_B = B^-1 b, duals, reduced costs.

    Returns (ok, x, reduced_costs, objective).  ok is False when a
    factorisation pivot falls below ``pivot_eps``.  Reduced costs at basic
    indices are zeroed exactly.
    """
    m = A.shape[0]
    n = A.shape[1]
    B = np.empty((m, m))
    Bt = np.empty((m, m))
    cb = np.empty(m)
    for k in range(m):
        jc = basis[k]
        cb[k] = c[jc]
        for i in range(m):
            B[i, k] = A[i, jc]
            Bt[k, i] = A[i, jc]
    perm = np.empty(m, np.int64)
    if not _lu_factor(B, perm, pivot_eps):
        return False, np.zeros(n), np.zeros(n), 0.0
    xb = _lu_solve(B, perm, b)
    permt = np.empty(m, np.int64)
    if not _lu_factor(Bt, permt, pivot_eps):
        return False, np.zeros(n), np.zeros(n), 0.0
    y = _lu_solve(Bt, permt, cb)
    rc = np.empty(n)
    for j in range(n):
        rc[j] = c[j]
    for i in range(m):
        yi = y[i]
        for j in range(n):
            rc[j] -= yi * A[i, j]
    x = np.zeros(n)
    obj = 0.0
    for k in range(m):
        x[basis[k]] = xb[k]
        obj += cb[k] * xb[k]
        rc[basis[k]] = 0.0
    return True, x, rc, obj


# ---------------------------------------------------------------------------
# Loop-form simplex (source for the numba backend).
# ---------------------------------------------------------------------------

@_jit
def _pivot(T, basis, m, ncol, r, jc):
    inv = 1.0 / T[r, jc]
    for j in range(ncol):
        T[r, j] *= inv
    T[r, jc] = 1.0
    for i in range(m + 1):
        if i == r:
            continue
        f = T[i, jc]
        if f != 0.0:
            for j in range(ncol):
                T[i, j] -= f * T[r, j]
        T[i, jc] = 0.0
    basis[r] = jc


@_jit
def _pivot_loop(T, basis, m, n_enter, tol_opt, pivot_eps, max_iter, iters):
    """Run Bland pivots until optimal (0), unbounded (2) or the cap (4)."""
    ncol = T.shape[1]
    rhs = ncol - 1
    while iters < max_iter:
        enter = -1
        for j in range(n_enter):
            if T[m, j] < -tol_opt:
                enter = j
                break
        if enter < 0:
            return 0, iters
        leave = -1
        best = 0.0
        for i in range(m):
            a = T[i, enter]
            if a > pivot_eps:
                r = T[i, rhs] / a
                if leave < 0 or r < best or (r == best and basis[i] < basis[leave]):
                    best = r
                    leave = i
        if leave < 0:
            return 2, iters
        _pivot(T, basis, m, ncol, leave, enter)
        iters += 1
    return 4, iters


@_jit
def _simplex_loops(c, A, b, tol_feas, tol_opt, pivot_eps, max_iter):
    m = A.shape[0]
    n = A.shape[1]
    ncol = n + m + 1
    rhs = ncol - 1
    T = np.zeros((m + 1, ncol))
    basis = np.empty(m, np.int64)
    for i in range(m):
        if b[i] < 0.0:
            for j in range(n):
                T[i, j] = -A[i, j]
            T[i, rhs] = -b[i]
        else:
            for j in range(n):
                T[i, j] = A[i, j]
            T[i, rhs] = b[i]
        T[i, n + i] = 1.0
        basis[i] = n + i
    # Phase 1: minimise the artificial sum; its reduced-cost row is the
    # negated column sums of the (sign-fixed) constraint rows.
    for i in range(m):
        for j in range(n):
            T[m, j] -= T[i, j]
        T[m, rhs] -= T[i, rhs]
    status, iters = _pivot_loop(T, basis, m, n, tol_opt, pivot_eps, max_iter, 0)
    if status != 0:
        # Phase 1 is bounded below by zero, so failing to pivot is numeric.
        return NUMERICAL, basis, iters
    if -T[m, rhs] > tol_feas:
        return INFEASIBLE, basis, iters
    # Drive artificials that linger degenerately at level zero out of the
    # basis; a row with no eligible original column is redundant.
    for i in range(m):
        if basis[i] >= n:
            pc = -1
            for j in range(n):
                if abs(T[i, j]) > pivot_eps:
                    pc = j
                    break
            if pc < 0:
                return RANK_DEFICIENT, basis, iters
            _pivot(T, basis, m, ncol, i, pc)
            iters += 1
    # Phase 2: rebuild the reduced-cost row from the true costs.
    for j in range(n):
        T[m, j] = c[j]
    for j in range(n, ncol):
        T[m, j] = 0.0
    for i in range(m):
        cb = c[basis[i]]
        if cb != 0.0:
            for j in range(ncol):
                T[m, j] -= cb * T[i, j]
    status, iters = _pivot_loop(T, basis, m, n, tol_opt, pivot_eps, max_iter, iters)
    if status == 2:
        return UNBOUNDED, basis, iters
    if status != 0:
        return NUMERICAL, basis, iters
    return OPTIMAL, basis, iters


# ---------------------------------------------------------------------------
# Vectorised numpy simplex (fallback backend).  Mirrors the loop kernel
# operation for operation: row updates are elementwise and reductions are
# accumulated row by row, so pivot decisions match the compiled path bit
# for bit.
# ---------------------------------------------------------------------------

def _pivot_np(T, basis, r, jc):
    T[r] *= 1.0 / T[r, jc]
    T[r, jc] = 1.0
    f = T[:, jc].copy()
    f[r] = 0.0
    T -= f[:, None] * T[r]
    T[:, jc] = 0.0
    T[r, jc] = 1.0
    basis[r] = jc


def _pivot_loop_np(T, basis, m, n_enter, tol_opt, pivot_eps, max_iter, iters):
    rhs = T.shape[1] - 1
    row = T[m]
    while iters < max_iter:
        neg = np.nonzero(row[:n_enter] < -tol_opt)[0]
        if neg.size == 0:
            return 0, iters
        enter = neg[0]
        col = T[:m, enter]
        elig = col > pivot_eps
        if not elig.any():
            return 2, iters
        ratios = np.full(m, np.inf)
        ratios[elig] = T[:m, rhs][elig] / col[elig]
        best = ratios.min()
        ties = np.nonzero(ratios == best)[0]
        leave = ties[np.argmin(basis[ties])]
        _pivot_np(T, basis, leave, enter)
        iters += 1
    return 4, iters


def _simplex_numpy(c, A, b, tol_feas, tol_opt, pivot_eps, max_iter):
    m, n = A.shape
    ncol = n + m + 1
    rhs = ncol - 1
    T = np.zeros((m + 1, ncol))
    basis = np.arange(n, n + m, dtype=np.int64)
    for i in range(m):
        if b[i] < 0.0:
            T[i, :n] = -A[i]
            T[i, rhs] = -b[i]
        else:
            T[i, :n] = A[i]
            T[i, rhs] = b[i]
        T[i, n + i] = 1.0
    for i in range(m):
        T[m, :n] -= T[i, :n]
        T[m, rhs] -= T[i, rhs]
    status, iters = _pivot_loop_np(T, basis, m, n, tol_opt, pivot_eps, max_iter, 0)
    if status != 0:
        return NUMERICAL, basis, iters
    if -T[m, rhs] > tol_feas:
        return INFEASIBLE, basis, iters
    for i in range(m):
        if basis[i] >= n:
            nz = np.nonzero(np.abs(T[i, :n]) > pivot_eps)[0]
            if nz.size == 0:
                return RANK_DEFICIENT, basis, iters
            _pivot_np(T, basis, i, nz[0])
            iters += 1
    T[m, :n] = c
    T[m, n:] = 0.0
    for i in range(m):
        cb = c[basis[i]]
        if cb != 0.0:
            T[m] -= cb * T[i]
    status, iters = _pivot_loop_np(T, basis, m, n, tol_opt, pivot_eps, max_iter, iters)
    if status == 2:
        return UNBOUNDED, basis, iters
    if status != 0:
        return NUMERICAL, basis, iters
    return OPTIMAL, basis, iters


simplex = _simplex_loops if _USE_NUMBA else _simplex_numpy
