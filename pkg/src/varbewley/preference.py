"""Deciding ``f >= g`` for a variational Bewley preference with one LP.

``f`` is weakly preferred to ``g`` exactly when

    min_p  sum_s p(s) (u(f(s)) - u(g(s))) + c(p)  >=  0,

the minimum running over priors in the effective domain of ``c`` (off the
domain ``c = +inf`` and the inequality is vacuous).  That minimum is the
*margin* reported by :func:`dominance`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .model import Act, AffineUtility, PerceptionFunction, Prior, minimize_over_priors

EPS_DEC = 1e-7


class DimensionMismatch(ValueError):
    pass


class Relation(enum.Enum):
    STRICTLY_PREFERS = "strictly_prefers"
    STRICTLY_DISPREFERRED = "strictly_dispreferred"
    INDIFFERENT = "indifferent"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class DominanceCertificate:
    margin: float
    argmin: Prior
    holds: bool
    utility_diff: np.ndarray

    def objective_at(self, p, c: PerceptionFunction) -> float:
        """Re-evaluate the dominance objective at prior ``p``."""
        w = np.asarray(p.weights if isinstance(p, Prior) else p, dtype=float)
        return float(w @ self.utility_diff) + c(w)

    def as_dict(self) -> dict:
        return {
            "margin": self.margin,
            "holds": self.holds,
            "argmin_prior": self.argmin.tolist(),
        }


def utility_values(u: AffineUtility, act: Act) -> np.ndarray:
    return u(act.outcomes)


def _check_dims(u: AffineUtility, c: PerceptionFunction, *acts: Act) -> None:
    for a in acts:
        if a.n_states != c.n_states:
            raise DimensionMismatch(f"act has {a.n_states} states, perception has {c.n_states}")
        if a.dim != u.dim:
            raise DimensionMismatch(f"act outcomes have dimension {a.dim}, utility expects {u.dim}")


def margin_from_diff(d, c: PerceptionFunction, eps_dec: float = EPS_DEC) -> DominanceCertificate:
    """Dominance certificate for a statewise utility difference ``d``."""
    d = np.asarray(d, dtype=float)
    S = c.n_states
    out = minimize_over_priors(S, d, [c.domain], pieces=(c.G, c.h))
    prior = Prior.of(out.x[:S])
    margin = float(out.value)
    return DominanceCertificate(margin, prior, bool(margin >= -eps_dec), d)


def dominance(u: AffineUtility, c: PerceptionFunction, f: Act, g: Act,
              eps_dec: float = EPS_DEC) -> DominanceCertificate:
    """Decide ``f >= g`` and return the certificate (margin, minimising prior)."""
    _check_dims(u, c, f, g)
    return margin_from_diff(utility_values(u, f) - utility_values(u, g), c, eps_dec)


@dataclass(frozen=True)
class Comparison:
    relation: Relation
    forward: DominanceCertificate    # f >= g
    backward: DominanceCertificate   # g >= f

    def as_dict(self) -> dict:
        return {
            "relation": self.relation.value,
            "f_over_g": self.forward.as_dict(),
            "g_over_f": self.backward.as_dict(),
        }


def classify(forward_holds: bool, backward_holds: bool) -> Relation:
    if forward_holds and backward_holds:
        return Relation.INDIFFERENT
    if forward_holds:
        return Relation.STRICTLY_PREFERS
    if backward_holds:
        return Relation.STRICTLY_DISPREFERRED
    return Relation.INCOMPARABLE


def compare(u: AffineUtility, c: PerceptionFunction, f: Act, g: Act,
            eps_dec: float = EPS_DEC) -> Comparison:
    fwd = dominance(u, c, f, g, eps_dec)
    bwd = dominance(u, c, g, f, eps_dec)
    return Comparison(classify(fwd.holds, bwd.holds), fwd, bwd)


def relation(u: AffineUtility, c: PerceptionFunction, f: Act, g: Act,
             eps_dec: float = EPS_DEC) -> Relation:
    """Strict preference is ``>=`` without ``<=``; neither direction is incomparability."""
    return compare(u, c, f, g, eps_dec).relation


def mixture(f: Act, g: Act, weight: float) -> Act:
    """Statewise ``weight * f + (1 - weight) * g`` for ``weight`` in ``(0, 1)``."""
    if not 0.0 < weight < 1.0:
        raise ValueError(f"mixture weight must lie in (0, 1), got {weight}")
    if f.outcomes.shape != g.outcomes.shape:
        raise DimensionMismatch("acts must have matching shapes")
    return Act(weight * f.outcomes + (1.0 - weight) * g.outcomes)
