"""Dense two-phase simplex with self-checked optimality and Farkas certificates.

Programs are small (tens of variables), so everything is a dense tableau and
pivoting follows Bland's rule.  Every returned outcome has been verified in the
coordinates of the *original* program: primal/dual residuals and the duality
gap for optimal outcomes, a Farkas multiplier for infeasible ones, and an
improving ray for unbounded ones.

Conventions for the original program ``min c.x`` subject to rows
``a_i.x <= b_i`` or ``a_i.x = b_i`` and ``x_j >= l_j`` (or ``x_j`` free):

* dual ``y`` has one entry per row, ``y_i <= 0`` on ``<=`` rows, and reduced
  costs ``r = c - A^T y`` are ``>= 0`` on bounded variables, ``0`` on free ones;
  the dual value is ``b.y + l.r``.
* a Farkas multiplier ``y`` has ``y_i >= 0`` on ``<=`` rows, ``z = A^T y`` is
  ``>= 0`` on bounded variables and ``0`` on free ones, and ``z.l > b.y``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels

EPS_FEAS = 1e-9
EPS_GAP = 1e-7

_TOL_COST = 1e-10
_TOL_PIVOT = 1e-11


class MalformedProgram(ValueError):
    """The program's arrays are inconsistent or contain non-finite numbers."""


class NumericalFailure(RuntimeError):
    """The solver finished but its certificate did not check out."""


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


LE = "<="
EQ = "="


@dataclass(frozen=True)
class LinearProgram:
    """``minimize objective . x`` subject to row constraints and lower bounds."""

    objective: np.ndarray
    A: np.ndarray
    relations: tuple
    b: np.ndarray
    lower: np.ndarray
    free: np.ndarray

    def __post_init__(self):
        n = self.objective.shape[0]
        if self.objective.ndim != 1:
            raise MalformedProgram("objective must be a vector")
        if self.A.ndim != 2 or self.A.shape[1] != n:
            raise MalformedProgram(
                f"constraint rows have width {self.A.shape[-1]}, objective has {n}"
            )
        if self.b.shape != (self.A.shape[0],) or len(self.relations) != self.A.shape[0]:
            raise MalformedProgram("row count mismatch between A, b and relations")
        if self.lower.shape != (n,) or self.free.shape != (n,):
            raise MalformedProgram("bounds must have one entry per variable")
        bad = [r for r in self.relations if r not in (LE, EQ)]
        if bad:
            raise MalformedProgram(f"unknown relation {bad[0]!r}")
        for name in ("objective", "A", "b"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise MalformedProgram(f"{name} contains non-finite entries")
        if not np.all(np.isfinite(self.lower[~self.free])):
            raise MalformedProgram("lower bounds of bounded variables must be finite")

    @classmethod
    def build(cls, objective, rows: Sequence = (), lower=None, free=None) -> "LinearProgram":
        """Assemble a program from ``(coefficients, relation, rhs)`` triples."""
        c = np.asarray(objective, dtype=float).ravel()
        n = c.shape[0]
        A = np.zeros((len(rows), n))
        b = np.zeros(len(rows))
        rels = []
        for i, (a, rel, rhs) in enumerate(rows):
            a = np.asarray(a, dtype=float).ravel()
            if a.shape[0] != n:
                raise MalformedProgram(f"row {i} has width {a.shape[0]}, objective has {n}")
            A[i] = a
            b[i] = rhs
            rels.append(rel)
        lo = np.zeros(n) if lower is None else np.asarray(lower, dtype=float).ravel()
        fr = np.zeros(n, dtype=bool) if free is None else np.asarray(free, dtype=bool).ravel()
        if lo.shape != (n,) or fr.shape != (n,):
            raise MalformedProgram("bounds must have one entry per variable")
        lo = np.where(fr, 0.0, lo)
        return cls(c, A, tuple(rels), b, lo, fr)

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]


@dataclass
class LpOutcome:
    status: Status
    value: float
    x: np.ndarray
    y: np.ndarray
    farkas: Optional[np.ndarray] = None
    ray: Optional[np.ndarray] = None
    iterations: int = 0
    residuals: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


# ---------------------------------------------------------------------------
# standard form
# ---------------------------------------------------------------------------


@dataclass
class _StandardForm:
    A: np.ndarray          # rows x (structural + slack + artificial)
    b: np.ndarray
    c: np.ndarray          # phase-2 costs, zero on slacks and artificials
    sign: np.ndarray       # row flips applied to reach b >= 0
    col_var: np.ndarray    # original variable of each structural column
    col_sign: np.ndarray   # +1 / -1 (negative part of a free variable)
    n_struct: int
    n_real: int            # structural + slack columns
    basis: np.ndarray
    artificial_rows: np.ndarray


def _standardize(lp: LinearProgram) -> _StandardForm:
    m = lp.A.shape[0]
    col_var, col_sign = [], []
    for j in range(lp.n_vars):
        col_var.append(j)
        col_sign.append(1.0)
        if lp.free[j]:
            col_var.append(j)
            col_sign.append(-1.0)
    col_var = np.array(col_var, dtype=np.int64)
    col_sign = np.array(col_sign)
    n_struct = col_var.shape[0]
    le_rows = [i for i, r in enumerate(lp.relations) if r == LE]
    n_slack = len(le_rows)

    b = lp.b - lp.A @ lp.lower
    sign = np.where(b < 0, -1.0, 1.0)
    structural = lp.A[:, col_var] * col_sign
    slack = np.zeros((m, n_slack))
    for k, i in enumerate(le_rows):
        slack[i, k] = 1.0
    A = np.hstack([structural, slack]) * sign[:, None]
    b = b * sign

    basis = np.full(m, -1, dtype=np.int64)
    for k, i in enumerate(le_rows):
        if sign[i] > 0:
            basis[i] = n_struct + k
    art_rows = np.flatnonzero(basis < 0)
    n_real = n_struct + n_slack
    art = np.zeros((m, art_rows.size))
    for k, i in enumerate(art_rows):
        art[i, k] = 1.0
        basis[i] = n_real + k
    A = np.hstack([A, art])
    c = np.zeros(A.shape[1])
    c[:n_struct] = lp.objective[col_var] * col_sign
    return _StandardForm(A, b, c, sign, col_var, col_sign, n_struct, n_real, basis, art_rows)


def _pivot(T: np.ndarray, r: int, j: int) -> None:
    piv_row = T[r] / T[r, j]
    factors = T[:, j].copy()
    factors[r] = 0.0
    T -= np.outer(factors, piv_row)
    T[r] = piv_row


def _set_costs(T: np.ndarray, basis: np.ndarray, cost: np.ndarray) -> None:
    m = T.shape[0] - 1
    T[m, :-1] = cost
    T[m, -1] = 0.0
    for i in range(m):
        T[m] -= cost[basis[i]] * T[i]


def _tableau(sf: _StandardForm, cost: np.ndarray) -> np.ndarray:
    m = sf.A.shape[0]
    T = np.zeros((m + 1, sf.A.shape[1] + 1))
    T[:m, :-1] = sf.A
    T[:m, -1] = sf.b
    _set_costs(T, sf.basis, cost)
    return T


def _basis_duals(sf: _StandardForm, cost: np.ndarray) -> np.ndarray:
    m = sf.A.shape[0]
    if m == 0:
        return np.zeros(0)
    B = sf.A[:, sf.basis]
    return np.linalg.solve(B.T, cost[sf.basis])


def _basic_solution(sf: _StandardForm) -> np.ndarray:
    m = sf.A.shape[0]
    z = np.zeros(sf.A.shape[1])
    if m:
        B = sf.A[:, sf.basis]
        z[sf.basis] = np.linalg.solve(B, sf.b)
    z[np.abs(z) < 1e-13] = 0.0
    return z


def _to_original(lp: LinearProgram, sf: _StandardForm, z: np.ndarray, shift: bool) -> np.ndarray:
    x = lp.lower.copy() if shift else np.zeros(lp.n_vars)
    np.add.at(x, sf.col_var, sf.col_sign * z[: sf.n_struct])
    return x


# ---------------------------------------------------------------------------
# certificate checks
# ---------------------------------------------------------------------------


def _is_le(lp: LinearProgram) -> np.ndarray:
    return np.array([r == LE for r in lp.relations], dtype=bool)


def _primal_residual(lp: LinearProgram, x: np.ndarray) -> float:
    le = _is_le(lp)
    ax = lp.A @ x - lp.b
    res = 0.0
    if ax.size:
        res = max(
            float(np.max(np.where(le, np.maximum(ax, 0.0), np.abs(ax)))),
            res,
        )
    bounded = ~lp.free
    if np.any(bounded):
        res = max(res, float(np.max(np.maximum(lp.lower[bounded] - x[bounded], 0.0))))
    return res


def _scale(*arrays) -> float:
    return 1.0 + max((float(np.max(np.abs(a))) if np.size(a) else 0.0) for a in arrays)


def _certify_optimal(lp: LinearProgram, x: np.ndarray, y: np.ndarray) -> dict:
    le = _is_le(lp)
    r = lp.objective - lp.A.T @ y
    primal = _primal_residual(lp, x)
    dual = 0.0
    if np.any(le):
        dual = max(dual, float(np.max(np.maximum(y[le], 0.0))))
    bounded = ~lp.free
    if np.any(bounded):
        dual = max(dual, float(np.max(np.maximum(-r[bounded], 0.0))))
    if np.any(lp.free):
        dual = max(dual, float(np.max(np.abs(r[lp.free]))))
    primal_value = float(lp.objective @ x)
    dual_value = float(lp.b @ y + lp.lower[bounded] @ r[bounded])
    gap = abs(primal_value - dual_value)
    res = {"primal": primal, "dual": dual, "gap": gap}
    a_scale = _scale(lp.A)
    if primal > EPS_FEAS * (_scale(lp.b) + a_scale * _scale(x)):
        raise NumericalFailure(f"primal residual {primal:.3e} exceeds tolerance")
    if dual > EPS_FEAS * (_scale(lp.objective) + a_scale * _scale(y)):
        raise NumericalFailure(f"dual residual {dual:.3e} exceeds tolerance")
    if gap > EPS_GAP * (1.0 + abs(primal_value)):
        raise NumericalFailure(f"duality gap {gap:.3e} exceeds tolerance")
    return res


def verify_farkas(lp: LinearProgram, y: np.ndarray) -> float:
    """Return the separation margin ``z.l - b.y`` of a Farkas multiplier.

    Raises ``NumericalFailure`` when ``y`` does not prove infeasibility.
    """
    le = _is_le(lp)
    z = lp.A.T @ y
    tol = EPS_FEAS * _scale(lp.A) * _scale(y)
    if np.any(le) and np.min(y[le]) < -tol:
        raise NumericalFailure("Farkas multiplier negative on an inequality row")
    bounded = ~lp.free
    if np.any(bounded) and np.min(z[bounded]) < -tol:
        raise NumericalFailure("Farkas combination negative on a bounded variable")
    if np.any(lp.free) and np.max(np.abs(z[lp.free])) > tol:
        raise NumericalFailure("Farkas combination nonzero on a free variable")
    margin = float(z[bounded] @ lp.lower[bounded] - lp.b @ y)
    if margin <= tol * _scale(lp.b, lp.lower):
        raise NumericalFailure(f"Farkas margin {margin:.3e} is not positive")
    return margin


def verify_ray(lp: LinearProgram, d: np.ndarray) -> float:
    """Return ``-c.d`` for an improving ray ``d``; raise if ``d`` is not one."""
    le = _is_le(lp)
    ad = lp.A @ d
    tol = EPS_FEAS * _scale(lp.A) * _scale(d)
    if ad.size and np.max(np.where(le, ad, np.abs(ad))) > tol:
        raise NumericalFailure("ray leaves the feasible region")
    bounded = ~lp.free
    if np.any(bounded) and np.min(d[bounded]) < -tol:
        raise NumericalFailure("ray decreases a bounded variable")
    slope = float(lp.objective @ d)
    if slope >= -tol * _scale(lp.objective):
        raise NumericalFailure("ray does not improve the objective")
    return -slope


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def solve(lp: LinearProgram, max_iter: int = 5000) -> LpOutcome:
    """Solve ``lp`` by two-phase simplex and return a certified outcome."""
    sf = _standardize(lp)
    m = sf.A.shape[0]
    n_cols = sf.A.shape[1]
    iterations = 0

    if sf.artificial_rows.size:
        cost1 = np.zeros(n_cols)
        cost1[sf.n_real:] = 1.0
        T = _tableau(sf, cost1)
        status, it, _ = _kernels.simplex_iterate(
            T, sf.basis, n_cols, _TOL_COST, _TOL_PIVOT, max_iter
        )
        iterations += it
        if status != _kernels.STATUS_OPTIMAL:
            raise NumericalFailure("phase 1 did not terminate")
        phase1 = -T[m, -1]
        if phase1 > EPS_FEAS * _scale(sf.b):
            y_std = _basis_duals(sf, cost1)
            farkas = -sf.sign * y_std
            verify_farkas(lp, farkas)
            return LpOutcome(Status.INFEASIBLE, float("nan"), np.full(lp.n_vars, np.nan),
                             np.zeros(m), farkas=farkas, iterations=iterations,
                             residuals={"phase1": float(phase1)})
        # drive zero-level artificials out of the basis where possible
        for r in range(m):
            if sf.basis[r] >= sf.n_real:
                row = T[r, : sf.n_real]
                cand = np.flatnonzero(np.abs(row) > 1e-9)
                if cand.size:
                    _pivot(T, r, int(cand[0]))
                    sf.basis[r] = int(cand[0])
        _set_costs(T, sf.basis, sf.c)
    else:
        T = _tableau(sf, sf.c)

    status, it, col = _kernels.simplex_iterate(
        T, sf.basis, sf.n_real, _TOL_COST, _TOL_PIVOT, max_iter
    )
    iterations += it
    if status == _kernels.STATUS_ITERATION_LIMIT:
        raise NumericalFailure(f"simplex hit the iteration limit ({max_iter})")
    if status == _kernels.STATUS_UNBOUNDED:
        d_std = np.zeros(n_cols)
        d_std[col] = 1.0
        d_std[sf.basis] = -T[:m, col]
        ray = _to_original(lp, sf, d_std, shift=False)
        verify_ray(lp, ray)
        return LpOutcome(Status.UNBOUNDED, float("-inf"), _to_original(lp, sf, _basic_solution(sf), True),
                         np.zeros(m), ray=ray, iterations=iterations)

    z = _basic_solution(sf)
    z = np.where((z < 0) & (z > -1e-9), 0.0, z)
    x = _to_original(lp, sf, z, shift=True)
    y = sf.sign * _basis_duals(sf, sf.c)
    residuals = _certify_optimal(lp, x, y)
    return LpOutcome(Status.OPTIMAL, float(lp.objective @ x), x, y,
                     iterations=iterations, residuals=residuals)


def minimize(objective, rows=(), lower=None, free=None) -> LpOutcome:
    """Shorthand for ``solve(LinearProgram.build(...))``."""
    return solve(LinearProgram.build(objective, rows, lower=lower, free=free))
