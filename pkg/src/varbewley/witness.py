"""Turning a violated perception condition into an explicit Pareto violation.

For polyhedral data the separating hyperplane is read off directly: a piece
``g . p + h`` of ``c_i`` that rises above ``c0`` at ``p*`` already separates
``(p*, c0(p*))`` from the epigraph of ``a_i c_i`` with unit weight on the
value axis, and a domain facet ``d . p <= e`` that ``p*`` breaks does so after
scaling.  The resulting ``(v, lam)`` is then realised as acts that move only
along agent ``i``'s private outcome direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .audit import ConditionViolation, UtilitarianDecomposition, diversity_check
from .lp import EPS_FEAS
from .model import Act, Prior, Profile
from .preference import EPS_DEC, DominanceCertificate, dominance


class DiversityFails(ValueError):
    pass


class InvalidViolation(ValueError):
    pass


class VerificationFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class DiversityWitness:
    """Row ``i`` of ``directions`` moves agent ``i+1``'s utility by one unit only."""

    directions: np.ndarray
    low: np.ndarray

    def high(self, agent: int) -> np.ndarray:
        return self.low + self.directions[agent - 1]

    def as_dict(self) -> dict:
        return {
            "low": self.low.tolist(),
            "directions": self.directions.tolist(),
        }


def diversity_witnesses(profile: Profile) -> DiversityWitness:
    report = diversity_check(profile)
    if not report.independent:
        raise DiversityFails(
            f"utility gradients have rank {report.rank} < {report.n_agents} agents"
        )
    Gm = profile.gradient_matrix
    directions = np.linalg.pinv(Gm).T
    check = Gm @ directions.T
    if np.max(np.abs(check - np.eye(Gm.shape[0]))) > 1e-9:
        raise DiversityFails("private directions could not be computed accurately")
    return DiversityWitness(directions, np.zeros(profile.outcome_dim))


@dataclass(frozen=True)
class SeparationCertificate:
    """``p . v + k a_i c_i(p) >= lam`` on ``dom c_i`` and ``lam > p* . v + k c0(p*)``.

    ``k`` is the value-axis weight of the separating normal; constructions
    produce ``k = 1`` and :meth:`scaled` multiplies the whole normal.
    """

    v: np.ndarray
    lam: float
    agent: int
    alpha: float
    kind: str                 # "piece" | "facet"
    index: int
    scale: Optional[float]    # facet multiplier M, None for pieces
    violation: ConditionViolation
    kappa: float = 1.0

    def lhs(self, p, profile: Profile) -> float:
        w = np.asarray(p, dtype=float)
        return float(w @ self.v) + self.kappa * self.alpha * profile.preference(self.agent).perception(w)

    def strict_margin(self, profile: Profile) -> float:
        """``lam - (p* . v + k c0(p*))``; positive for a valid certificate."""
        p = self.violation.prior.weights
        return self.lam - float(p @ self.v) - self.kappa * profile.social.perception(p)

    def scaled(self, gamma: float) -> "SeparationCertificate":
        if not gamma > 0:
            raise ValueError("scale factor must be positive")
        return SeparationCertificate(gamma * self.v, gamma * self.lam, self.agent, self.alpha,
                                     self.kind, self.index, self.scale, self.violation,
                                     gamma * self.kappa)

    def normalized(self) -> "SeparationCertificate":
        return self.scaled(1.0 / self.kappa)

    def as_dict(self) -> dict:
        d = {
            "v": self.v.tolist(),
            "lambda": self.lam,
            "agent": self.agent,
            "alpha": self.alpha,
            "provenance": self.kind,
            "index": self.index,
            "kappa": self.kappa,
        }
        if self.scale is not None:
            d["scale"] = self.scale
        return d


def build_separation(profile: Profile, decomp: UtilitarianDecomposition,
                     violation: ConditionViolation, eps_dec: float = EPS_DEC) -> SeparationCertificate:
    i = violation.agent
    alpha = float(decomp.weights[i - 1])
    if alpha <= EPS_FEAS:
        raise InvalidViolation(f"agent {i} has zero weight and cannot carry a violation")
    ci = profile.preference(i).perception
    c0 = profile.social.perception
    p = violation.prior.weights
    s0 = c0(p)
    if not np.isfinite(s0):
        raise InvalidViolation("violating prior lies outside dom c0")

    if violation.kind == "finite":
        if ci.n_pieces == 0:
            raise InvalidViolation("finite gap claimed for a piece-free perception function")
        piece_vals = alpha * (ci.G @ p + ci.h)
        k = int(np.argmax(piece_vals))
        gap = float(piece_vals[k] - s0)
        if gap <= eps_dec:
            raise InvalidViolation(f"re-evaluated gap {gap:.3g} does not exceed {eps_dec:g}")
        sep = SeparationCertificate(-alpha * ci.G[k], float(alpha * ci.h[k]), i, alpha,
                                    "piece", k, None, violation)
    elif violation.kind == "infinite":
        d, e = np.asarray(violation.facet_row[0]), float(violation.facet_row[1])
        slack = float(d @ p - e)
        if slack <= eps_dec:
            raise InvalidViolation(f"re-evaluated facet slack {slack:.3g} does not exceed {eps_dec:g}")
        M = (s0 + 1.0) / slack
        sep = SeparationCertificate(-M * d, float(-M * e), i, alpha, "facet",
                                    int(violation.facet), float(M), violation)
    else:
        raise InvalidViolation(f"unknown violation kind {violation.kind!r}")

    if sep.strict_margin(profile) <= eps_dec:
        raise InvalidViolation("separation is not strict at the violating prior")
    return sep


@dataclass(frozen=True)
class ParetoWitness:
    """Every individual weakly prefers ``f`` to the constant act ``x``; society does not."""

    f: Act
    x: Act
    agent_certificates: tuple
    social_certificate: DominanceCertificate
    prior: Prior
    social_value_at_prior: float
    separation: SeparationCertificate

    @property
    def margins(self) -> tuple:
        return tuple(c.margin for c in self.agent_certificates) + (self.social_certificate.margin,)

    def as_dict(self) -> dict:
        return {
            "f": self.f.as_dict(),
            "x": self.x.as_dict(),
            "agent_margins": [c.margin for c in self.agent_certificates],
            "social_margin": self.social_certificate.margin,
            "social_argmin_prior": self.social_certificate.argmin.tolist(),
            "violating_prior": self.prior.tolist(),
            "social_value_at_prior": self.social_value_at_prior,
            "separation": self.separation.as_dict(),
        }


def construct_witness(profile: Profile, decomp: UtilitarianDecomposition,
                      sep: SeparationCertificate, dw: DiversityWitness,
                      eps_dec: float = EPS_DEC) -> ParetoWitness:
    """Realise ``(v, lam)`` as acts on agent ``i*``'s private line and re-verify."""
    sep = sep.normalized()
    i = sep.agent
    alpha = float(decomp.weights[i - 1])
    if alpha <= EPS_FEAS:
        raise VerificationFailed(f"agent {i} has zero weight")
    S = profile.n_states
    u_i = profile.preference(i).utility
    delta = dw.directions[i - 1]
    base = float(u_i(dw.low))
    x_out = dw.low + (sep.lam / alpha - base) * delta
    f_out = dw.low + np.outer(sep.v / alpha - base, delta)
    f = Act(f_out, "f")
    x = Act.constant(x_out, S, "x")

    certs = []
    for j in range(1, profile.n_agents + 1):
        pref = profile.preference(j)
        cert = dominance(pref.utility, pref.perception, f, x, eps_dec)
        if not cert.holds:
            raise VerificationFailed(f"agent {j} does not weakly prefer f to x "
                                     f"(margin {cert.margin:.3g})")
        certs.append(cert)
    social = dominance(profile.social.utility, profile.social.perception, f, x, eps_dec)
    p_star = sep.violation.prior
    at_prior = social.objective_at(p_star, profile.social.perception)
    expected = -sep.strict_margin(profile)
    tol = EPS_FEAS * (1.0 + float(np.max(np.abs(sep.v))) + abs(sep.lam))
    if at_prior > expected + tol:
        raise VerificationFailed(f"social objective at p* is {at_prior:.6g}, expected ≤ {expected:.6g}")
    if not social.margin < -10 * eps_dec:
        raise VerificationFailed(f"social margin {social.margin:.3g} is not below -10·ε_dec")
    return ParetoWitness(f, x, tuple(certs), social, p_star, float(at_prior), sep)


def forge(profile: Profile, decomp: UtilitarianDecomposition, violation: ConditionViolation,
          eps_dec: float = EPS_DEC) -> ParetoWitness:
    """Separation plus act construction in one step."""
    sep = build_separation(profile, decomp, violation, eps_dec)
    return construct_witness(profile, decomp, sep, diversity_witnesses(profile), eps_dec)
