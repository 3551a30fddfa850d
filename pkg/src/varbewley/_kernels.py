"""Hot numeric kernels: simplex pivoting and lattice minimisation.

Each kernel has a numba-compiled implementation and a pure-numpy one.  The
numpy path is used when numba is unavailable or when the environment variable
``VARBEWLEY_DISABLE_NUMBA`` is set to a non-empty value other than ``0``.
Both paths take the same arguments and make the same pivot/argmin choices.
"""

import os

import numpy as np

STATUS_OPTIMAL = 0
STATUS_UNBOUNDED = 1
STATUS_ITERATION_LIMIT = 2

_GRID_CHUNK = 2048


def _numba_requested():
    flag = os.environ.get("VARBEWLEY_DISABLE_NUMBA", "")
    return flag in ("", "0")


try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# simplex iteration
# ---------------------------------------------------------------------------


def _simplex_iterate_numpy(T, basis, n_enter, tol_cost, tol_piv, max_iter):
    """Run Bland-rule primal simplex on tableau ``T`` in place.

    ``T`` has one row per constraint followed by the reduced-cost row; its last
    column is the right-hand side.  Only columns ``< n_enter`` may enter.
    Returns ``(status, iterations, column)`` where ``column`` is the entering
    column that proved unboundedness (``-1`` otherwise).
    """
    m = T.shape[0] - 1
    tie_tol = 1e-12
    for it in range(max_iter):
        cost = T[m, :n_enter]
        candidates = np.flatnonzero(cost < -tol_cost)
        if candidates.size == 0:
            return STATUS_OPTIMAL, it, -1
        j = int(candidates[0])
        col = T[:m, j]
        rows = np.flatnonzero(col > tol_piv)
        if rows.size == 0:
            return STATUS_UNBOUNDED, it, j
        ratios = T[rows, -1] / col[rows]
        best = -1
        best_ratio = 0.0
        for idx in range(rows.size):
            i = rows[idx]
            r = ratios[idx]
            if best < 0 or r < best_ratio - tie_tol:
                best, best_ratio = i, r
            elif abs(r - best_ratio) <= tie_tol and basis[i] < basis[best]:
                best, best_ratio = i, r
        piv_row = T[best] / T[best, j]
        factors = T[:, j].copy()
        factors[best] = 0.0
        T -= np.outer(factors, piv_row)
        T[best] = piv_row
        basis[best] = j
    return STATUS_ITERATION_LIMIT, max_iter, -1


def _simplex_iterate_loops(T, basis, n_enter, tol_cost, tol_piv, max_iter):
    m = T.shape[0] - 1
    width = T.shape[1]
    tie_tol = 1e-12
    for it in range(max_iter):
        j = -1
        for c in range(n_enter):
            if T[m, c] < -tol_cost:
                j = c
                break
        if j < 0:
            return STATUS_OPTIMAL, it, -1
        best = -1
        best_ratio = 0.0
        for i in range(m):
            a = T[i, j]
            if a > tol_piv:
                r = T[i, width - 1] / a
                if best < 0 or r < best_ratio - tie_tol:
                    best = i
                    best_ratio = r
                elif abs(r - best_ratio) <= tie_tol and basis[i] < basis[best]:
                    best = i
                    best_ratio = r
        if best < 0:
            return STATUS_UNBOUNDED, it, j
        pivot = T[best, j]
        for c in range(width):
            T[best, c] = T[best, c] / pivot
        for k in range(m + 1):
            if k != best:
                f = T[k, j]
                if f != 0.0:
                    for c in range(width):
                        T[k, c] -= f * T[best, c]
        basis[best] = j
    return STATUS_ITERATION_LIMIT, max_iter, -1


# ---------------------------------------------------------------------------
# lattice minimisation
# ---------------------------------------------------------------------------


def _grid_min_numpy(D, L, cvals):
    """Row-wise ``min_g D[k] . L[g] + cvals[g]`` and its first argmin."""
    n_pairs = D.shape[0]
    mins = np.empty(n_pairs)
    arg = np.empty(n_pairs, dtype=np.int64)
    for start in range(0, n_pairs, _GRID_CHUNK):
        block = D[start:start + _GRID_CHUNK] @ L.T
        block += cvals
        a = np.argmin(block, axis=1)
        arg[start:start + _GRID_CHUNK] = a
        mins[start:start + _GRID_CHUNK] = block[np.arange(block.shape[0]), a]
    return mins, arg


def _grid_min_loops(D, L, cvals):
    n_pairs, n_states = D.shape
    n_grid = L.shape[0]
    mins = np.empty(n_pairs)
    arg = np.empty(n_pairs, dtype=np.int64)
    for k in range(n_pairs):
        best = np.inf
        best_g = 0
        for g in range(n_grid):
            v = cvals[g]
            for s in range(n_states):
                v += D[k, s] * L[g, s]
            if v < best:
                best = v
                best_g = g
        mins[k] = best
        arg[k] = best_g
    return mins, arg


if HAVE_NUMBA:
    _simplex_iterate_numba = numba.njit(cache=True)(_simplex_iterate_loops)
    _grid_min_numba = numba.njit(cache=True)(_grid_min_loops)
else:  # pragma: no cover
    _simplex_iterate_numba = None
    _grid_min_numba = None


USE_NUMBA = HAVE_NUMBA and _numba_requested()
BACKEND = "numba" if USE_NUMBA else "numpy"

if USE_NUMBA:
    simplex_iterate = _simplex_iterate_numba
    grid_min = _grid_min_numba
else:
    simplex_iterate = _simplex_iterate_numpy
    grid_min = _grid_min_numpy


def warm_up():
    """Trigger JIT compilation of the numba kernels (no-op on numpy)."""
    T = np.array([[1.0, 1.0, 1.0], [-1.0, 0.0, 0.0]])
    basis = np.array([1], dtype=np.int64)
    simplex_iterate(T, basis, 2, 1e-10, 1e-11, 10)
    grid_min(np.zeros((1, 2)), np.eye(2), np.zeros(2))
