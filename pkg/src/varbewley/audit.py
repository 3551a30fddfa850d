"""Aggregation-side checks: utilitarian weights and perception-function conditions.

All checks reduce to finitely many LPs because perception functions are
polyhedral: the pointwise condition ``c0(p) >= max_i a_i c_i(p)`` fails iff
some affine piece of some ``a_i c_i`` rises above ``c0`` somewhere on the
common domain, or ``dom c0`` pokes out through a facet of ``dom c_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .lp import EPS_FEAS, EQ, Status, minimize
from .model import (
    INF,
    Polyhedron,
    Prior,
    Profile,
    minimize_over_priors,
    polyhedra_meet,
    zero_set,
)
from .preference import EPS_DEC

RANK_TOL = 1e-9


class NotBewleySocial(ValueError):
    pass


class NotBewleyAgents(ValueError):
    pass


# ---------------------------------------------------------------------------
# utilitarian decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UtilitarianDecomposition:
    weights: np.ndarray
    shift: float
    residual: float
    unique: bool = True

    def positive(self, tol: float = EPS_FEAS) -> list:
        """1-based indices of agents whose weight exceeds ``tol``."""
        return [i + 1 for i, a in enumerate(self.weights) if a > tol]

    def as_dict(self) -> dict:
        return {
            "alpha": self.weights.tolist(),
            "beta": self.shift,
            "residual": self.residual,
            "unique": self.unique,
        }


@dataclass(frozen=True)
class NoDecomposition:
    reason: str                       # "inconsistent system" | "negative weight"
    detail: str = ""
    least_squares: Optional[np.ndarray] = None
    negative_agents: tuple = ()

    def as_dict(self) -> dict:
        d = {"reason": self.reason, "detail": self.detail}
        if self.least_squares is not None:
            d["least_squares_alpha"] = self.least_squares.tolist()
        if self.negative_agents:
            d["negative_agents"] = list(self.negative_agents)
        return d


@dataclass(frozen=True)
class DiversityReport:
    rank: int
    n_agents: int
    singular_values: np.ndarray

    @property
    def independent(self) -> bool:
        return self.rank == self.n_agents

    def as_dict(self) -> dict:
        return {
            "independent": self.independent,
            "rank": self.rank,
            "n_agents": self.n_agents,
            "singular_values": self.singular_values.tolist(),
        }


def _rank(M: np.ndarray) -> tuple:
    sv = np.linalg.svd(M, compute_uv=False)
    top = sv[0] if sv.size else 0.0
    return int(np.sum(sv > RANK_TOL * max(top, 1.0))), sv


def diversity_check(profile: Profile) -> DiversityReport:
    """Whether the individual utility gradients are linearly independent."""
    rank, sv = _rank(profile.gradient_matrix)
    return DiversityReport(rank, profile.n_agents, sv)


def decompose_utility(profile: Profile) -> Union[UtilitarianDecomposition, NoDecomposition]:
    """Write ``u0 = sum_i a_i u_i + b`` with ``a >= 0``, or say why not.

    With dependent gradients the weights are not unique; the nonnegative
    solution of least total weight is returned, flagged ``unique=False``.
    """
    Gm = profile.gradient_matrix
    g0 = profile.social.utility.gradient
    tol = EPS_FEAS * (1.0 + float(np.max(np.abs(g0))))
    alpha, *_ = np.linalg.lstsq(Gm.T, g0, rcond=None)
    ls_residual = float(np.linalg.norm(Gm.T @ alpha - g0))
    rank, _ = _rank(Gm)
    unique = rank == profile.n_agents

    if unique:
        if ls_residual > tol:
            return NoDecomposition("inconsistent system",
                                   f"social gradient is off the span of individual gradients "
                                   f"(residual {ls_residual:.3g})", alpha)
        neg = tuple(i + 1 for i, a in enumerate(alpha) if a < -EPS_FEAS)
        if neg:
            return NoDecomposition("negative weight",
                                   "negative weight α_i for agent(s) " + ", ".join(map(str, neg)),
                                   alpha, neg)
        alpha = np.maximum(alpha, 0.0)
    else:
        n = profile.n_agents
        rows = [(Gm[:, j], EQ, g0[j]) for j in range(Gm.shape[1])]
        out = minimize(np.ones(n), rows)
        if out.status is not Status.OPTIMAL:
            if ls_residual > tol:
                return NoDecomposition("inconsistent system",
                                       f"social gradient is off the span (residual {ls_residual:.3g})",
                                       alpha)
            return NoDecomposition("negative weight",
                                   "no nonnegative weights reproduce the social gradient", alpha)
        alpha = np.maximum(out.x, 0.0)

    intercepts = np.array([a.utility.intercept for a in profile.agents])
    beta = float(profile.social.utility.intercept - alpha @ intercepts)
    residual = float(np.linalg.norm(Gm.T @ alpha - g0))
    return UtilitarianDecomposition(alpha, beta, residual, unique)


# ---------------------------------------------------------------------------
# the pointwise perception condition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConditionViolation:
    """A prior where ``a_i c_i(p) > c0(p)``; ``gap`` is ``inf`` off ``dom c_i``."""

    prior: Prior
    agent: int
    kind: str                       # "finite" | "infinite"
    gap: float
    social_value: float
    agent_value: float
    piece: Optional[int] = None
    facet: Optional[int] = None
    facet_row: Optional[tuple] = None
    slack: Optional[float] = None
    sweep_optimum: float = 0.0

    def as_dict(self) -> dict:
        d = {
            "prior": self.prior.tolist(),
            "agent": self.agent,
            "kind": self.kind,
            "gap": None if self.gap == INF else self.gap,
            "social_value": self.social_value,
            "agent_value": None if self.agent_value == INF else self.agent_value,
            "sweep_optimum": self.sweep_optimum,
        }
        if self.piece is not None:
            d["piece"] = self.piece
        if self.facet is not None:
            d["facet"] = self.facet
            d["facet_row"] = {"a": list(self.facet_row[0]), "b": self.facet_row[1]}
            d["slack"] = self.slack
        return d


@dataclass(frozen=True)
class SweepEntry:
    agent: int
    kind: str        # "piece" | "facet"
    index: int
    optimum: Optional[float]   # None when the LP region is empty

    def as_dict(self) -> dict:
        return {"agent": self.agent, "kind": self.kind, "index": self.index, "optimum": self.optimum}


@dataclass(frozen=True)
class ConditionReport:
    satisfied: bool
    violations: tuple
    sweep: tuple
    exempt: tuple
    eps_dec: float

    @property
    def violation(self) -> Optional[ConditionViolation]:
        """The violation best suited to witness construction.

        Preference order: the largest finite gap if it clears ``10 eps_dec``,
        then the largest domain-facet slack, then whatever is left.
        """
        if not self.violations:
            return None
        finite = [v for v in self.violations if v.kind == "finite"]
        infinite = [v for v in self.violations if v.kind == "infinite"]
        best_finite = self._first_best(finite, lambda v: v.gap)
        if best_finite is not None and best_finite.gap > 10 * self.eps_dec:
            return best_finite
        if infinite:
            return self._first_best(infinite, lambda v: v.slack)
        return best_finite

    def _first_best(self, items, key):
        # near-ties go to the earliest entry (lowest agent, then piece/facet)
        if not items:
            return None
        top = max(key(v) for v in items)
        return next(v for v in items if key(v) >= top - self.eps_dec)

    def as_dict(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "exempt_agents": list(self.exempt),
            "violations": [v.as_dict() for v in self.violations],
            "sweep": [s.as_dict() for s in self.sweep],
        }


def check_theorem1_condition(profile: Profile, decomp: UtilitarianDecomposition,
                             eps_dec: float = EPS_DEC) -> ConditionReport:
    """Check ``c0(p) >= max_i a_i c_i(p)`` on the whole simplex.

    Agents with ``a_i <= EPS_FEAS`` are exempt (``0 * inf = 0``).
    """
    if not isinstance(decomp, UtilitarianDecomposition):
        raise TypeError("a utilitarian decomposition is required")
    if decomp.residual > EPS_FEAS * (1.0 + float(np.max(np.abs(profile.social.utility.gradient)))):
        raise ValueError(f"decomposition residual {decomp.residual:.3g} is too large")
    S = profile.n_states
    c0 = profile.social.perception
    sweep, violations, exempt = [], [], []
    for i, alpha in enumerate(decomp.weights, start=1):
        if alpha <= EPS_FEAS:
            exempt.append(i)
            continue
        ci = profile.preference(i).perception
        for k, (g, h) in enumerate(zip(ci.G, ci.h)):
            out = minimize_over_priors(S, -alpha * g, [ci.domain, c0.domain], pieces=(c0.G, c0.h))
            if out.status is not Status.OPTIMAL:
                sweep.append(SweepEntry(i, "piece", k, None))
                continue
            optimum = -out.value + alpha * h
            sweep.append(SweepEntry(i, "piece", k, float(optimum)))
            if optimum > eps_dec:
                p = Prior.of(out.x[:S])
                s0, si = c0(p), ci(p)
                violations.append(ConditionViolation(
                    p, i, "finite", float(alpha * si - s0), float(s0), float(si),
                    piece=k, sweep_optimum=float(optimum)))
        for k, (d, e) in enumerate(zip(ci.domain.A, ci.domain.b)):
            out = minimize_over_priors(S, -d, [c0.domain])
            optimum = -out.value - e
            sweep.append(SweepEntry(i, "facet", k, float(optimum)))
            if optimum > eps_dec:
                p = Prior.of(out.x[:S])
                slack = float(d @ p.weights - e)
                violations.append(ConditionViolation(
                    p, i, "infinite", INF, float(c0(p)), INF,
                    facet=k, facet_row=(tuple(d.tolist()), float(e)), slack=slack,
                    sweep_optimum=float(optimum)))
    return ConditionReport(not violations, tuple(violations), tuple(sweep), tuple(exempt), eps_dec)


# ---------------------------------------------------------------------------
# containment checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Containment:
    contained: bool
    witness: Optional[Prior] = None
    row: Optional[int] = None
    excess: float = 0.0

    def __bool__(self):
        return self.contained

    def as_dict(self) -> dict:
        d = {"contained": self.contained}
        if not self.contained:
            d.update(witness=self.witness.tolist(), row=self.row, excess=self.excess)
        return d


def polytope_contained(P: Polyhedron, Q: Polyhedron, eps_dec: float = EPS_DEC) -> Containment:
    """Decide ``P ⊆ Q`` (both within the simplex) row by row of ``Q``.

    On failure the witness is the point of ``P`` that violates its row of
    ``Q`` the most, among all rows.
    """
    worst = None
    for k, (a, b) in enumerate(zip(Q.A, Q.b)):
        out = minimize_over_priors(P.n_states, -a, [P])
        excess = -out.value - b
        if excess > eps_dec and (worst is None or excess > worst[2]):
            worst = (out.x[: P.n_states], k, float(excess))
    if worst is None:
        return Containment(True)
    return Containment(False, Prior.of(worst[0]), worst[1], worst[2])


@dataclass(frozen=True)
class ContainmentReport:
    holds: bool
    per_agent: dict            # agent -> Containment (agents with positive weight)
    failing_agents: tuple
    common_zero_empty: Optional[bool] = None

    def as_dict(self) -> dict:
        d = {
            "holds": self.holds,
            "failing_agents": list(self.failing_agents),
            "per_agent": {str(k): v.as_dict() for k, v in self.per_agent.items()},
        }
        if self.common_zero_empty is not None:
            d["common_zero_set_empty"] = self.common_zero_empty
            if self.common_zero_empty:
                d["note"] = ("individual zero sets have empty intersection: "
                             "Pareto forces α_i = 0 for at least one individual")
        return d


def _containment_report(inner: Polyhedron, outer: dict, decomp, eps_dec, common=None):
    per_agent = {}
    for i in decomp.positive():
        per_agent[i] = polytope_contained(inner, outer[i], eps_dec)
    failing = tuple(i for i, r in per_agent.items() if not r.contained)
    return ContainmentReport(not failing, per_agent, failing, common)


def check_corollary1(profile: Profile, decomp: UtilitarianDecomposition,
                     eps_dec: float = EPS_DEC) -> ContainmentReport:
    """Zero set of ``c0`` inside each positively weighted agent's zero set."""
    zeros = {i: zero_set(profile.preference(i).perception) for i in range(1, profile.n_agents + 1)}
    common_empty = not polyhedra_meet(list(zeros.values()))
    return _containment_report(zero_set(profile.social.perception), zeros, decomp, eps_dec, common_empty)


def check_corollary2(profile: Profile, decomp: UtilitarianDecomposition,
                     eps_dec: float = EPS_DEC) -> ContainmentReport:
    """All-Bewley case: ``P0`` inside each positively weighted ``P_i``."""
    if not profile.social.perception.is_bewley():
        raise NotBewleySocial("social perception is not a Bewley indicator")
    if not all(a.perception.is_bewley() for a in profile.agents):
        raise NotBewleyAgents("some individual perception is not a Bewley indicator")
    return check_corollary1(profile, decomp, eps_dec)


def check_prop1(profile: Profile, decomp: UtilitarianDecomposition,
                eps_dec: float = EPS_DEC) -> ContainmentReport:
    """Bewley planner: Pareto holds iff ``P0`` lies in every weighted zero set."""
    c0 = profile.social.perception
    if not c0.is_bewley():
        raise NotBewleySocial("social perception is not a Bewley indicator")
    zeros = {i: zero_set(profile.preference(i).perception) for i in range(1, profile.n_agents + 1)}
    return _containment_report(zero_set(c0), zeros, decomp, eps_dec)


def check_prop2(profile: Profile, decomp: UtilitarianDecomposition,
                eps_dec: float = EPS_DEC) -> ContainmentReport:
    """Bewley individuals: Pareto holds iff ``dom c0`` lies in every weighted ``P_i``."""
    if not all(a.perception.is_bewley() for a in profile.agents):
        raise NotBewleyAgents("some individual perception is not a Bewley indicator")
    sets = {i: zero_set(profile.preference(i).perception) for i in range(1, profile.n_agents + 1)}
    return _containment_report(profile.social.perception.domain, sets, decomp, eps_dec)


@dataclass(frozen=True)
class LiberalismReport:
    holds: bool
    condition: ConditionReport

    def as_dict(self) -> dict:
        return {"holds": self.holds}


def check_prop3_liberalism(profile: Profile, decomp: UtilitarianDecomposition,
                           eps_dec: float = EPS_DEC) -> LiberalismReport:
    """Liberalism on private act families is equivalent to the pointwise condition."""
    report = check_theorem1_condition(profile, decomp, eps_dec)
    return LiberalismReport(report.satisfied, report)
