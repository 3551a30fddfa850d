"""Brute-force ground truth: simplex lattices and sampled act spaces.

Nothing here uses the LP engine to *decide* anything; grid evaluation over the
rational simplex lattice stands in for the universal quantifier over priors.
LP calls appear only to re-verify candidate violations before reporting them,
so a report never contains a violation the exact engine would reject.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .model import INF, Act, AffineUtility, PerceptionFunction, Prior, Profile
from .preference import EPS_DEC, margin_from_diff

MAX_STATES = 6
MAX_LATTICE = 5_000_000
SAMPLE_BOX = 8.0

DEFAULT_GRID = {1: 1, 2: 200, 3: 30, 4: 12, 5: 8, 6: 6}


class ResolutionOverflow(ValueError):
    pass


def lattice_size(n_states: int, resolution: int) -> int:
    return math.comb(resolution + n_states - 1, n_states - 1)


@lru_cache(maxsize=None)
def _compositions(total: int, parts: int) -> np.ndarray:
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    blocks = []
    for first in range(total, -1, -1):
        rest = _compositions(total - first, parts - 1)
        blocks.append(np.column_stack([np.full(rest.shape[0], first, dtype=np.int64), rest]))
    return np.vstack(blocks)


@lru_cache(maxsize=32)
def _lattice(n_states: int, resolution: int) -> np.ndarray:
    pts = _compositions(resolution, n_states) / resolution
    pts.setflags(write=False)
    return pts


def grid_priors(n_states: int, resolution: int) -> np.ndarray:
    """All priors with denominator ``resolution``, one per row.

    Ordered lexicographically by decreasing first coordinate, so for two
    states the first row is ``(1, 0)``.
    """
    if resolution < 1:
        raise ValueError("resolution must be at least 1")
    if n_states < 1:
        raise ValueError("at least one state is required")
    if n_states > MAX_STATES:
        raise ResolutionOverflow(f"grid enumeration is limited to {MAX_STATES} states")
    if lattice_size(n_states, resolution) > MAX_LATTICE:
        raise ResolutionOverflow(
            f"lattice of {lattice_size(n_states, resolution)} priors exceeds {MAX_LATTICE}"
        )
    return _lattice(n_states, resolution)


def default_resolution(n_states: int) -> int:
    return DEFAULT_GRID.get(n_states, 4)


@dataclass(frozen=True, eq=False)
class GridView:
    """Lattice priors inside ``dom c`` together with the values of ``c``."""

    priors: np.ndarray
    values: np.ndarray

    @classmethod
    def of(cls, c: PerceptionFunction, resolution: int) -> "GridView":
        L = grid_priors(c.n_states, resolution)
        vals = c.values(L)
        keep = np.isfinite(vals)
        return cls(np.ascontiguousarray(L[keep]), np.ascontiguousarray(vals[keep]))

    @property
    def empty(self) -> bool:
        return self.priors.shape[0] == 0

    def margins(self, diffs: np.ndarray):
        """Grid margins ``min_p d . p + c(p)`` for each row ``d`` of ``diffs``."""
        diffs = np.ascontiguousarray(np.atleast_2d(diffs), dtype=float)
        if self.empty:
            return np.full(diffs.shape[0], INF), np.full(diffs.shape[0], -1, dtype=np.int64)
        return _kernels.grid_min(diffs, self.priors, self.values)


@dataclass(frozen=True)
class GridMargin:
    margin: float
    prior: Optional[Prior]
    empty_domain: bool = False


def grid_dominance(u: AffineUtility, c: PerceptionFunction, f: Act, g: Act,
                   resolution: int) -> GridMargin:
    """Approximate dominance margin by exhaustive lattice evaluation.

    ``empty_domain`` is set (and the margin is ``+inf``) when no lattice prior
    lies in ``dom c``; refine the resolution in that case.
    """
    view = GridView.of(c, resolution)
    if view.empty:
        return GridMargin(INF, None, True)
    d = u(f.outcomes) - u(g.outcomes)
    mins, arg = view.margins(d[None, :])
    return GridMargin(float(mins[0]), Prior(view.priors[arg[0]].copy()))


def lipschitz_bound(d, c: PerceptionFunction, resolution: int) -> float:
    """Worst-case gap between grid and exact margins for a full-box domain.

    Rounding a prior to the lattice moves at most ``floor(S/2) / r`` mass, and
    the objective changes by at most its spread per unit of moved mass.
    """
    d = np.asarray(d, dtype=float)
    spread = float(np.ptp(d))
    slope = float(np.max(np.ptp(c.G, axis=1))) if c.n_pieces else 0.0
    return (c.n_states // 2) * (spread + slope) / resolution


# ---------------------------------------------------------------------------
# act sampling in utility coordinates
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _UtilityFrame:
    """Maps individual utility values (plus null-space coordinates) to outcomes."""

    right_inverse: np.ndarray   # m x n
    null_basis: np.ndarray      # m x k
    intercepts: np.ndarray      # n

    @classmethod
    def of(cls, profile: Profile) -> "_UtilityFrame":
        Gm = profile.gradient_matrix
        _, sv, Vt = np.linalg.svd(Gm)
        rank = int(np.sum(sv > 1e-9 * max(sv[0], 1.0)))
        null = Vt[rank:].T
        intercepts = np.array([a.utility.intercept for a in profile.agents])
        return cls(np.linalg.pinv(Gm), null, intercepts)

    def outcomes(self, U: np.ndarray, Z: np.ndarray) -> np.ndarray:
        """``U[..., n]`` utilities and ``Z[..., k]`` null coordinates to outcomes."""
        return (U - self.intercepts) @ self.right_inverse.T + Z @ self.null_basis.T


def _private_directions(profile: Profile) -> np.ndarray:
    return np.linalg.pinv(profile.gradient_matrix).T


def _utilities(profile: Profile, outcomes: np.ndarray) -> list:
    """Per preference (social first), utility of each outcome in ``outcomes[..., m]``."""
    return [profile.preference(k).utility(outcomes) for k in range(profile.n_agents + 1)]


@dataclass
class OracleViolation:
    stratum: str
    f: Act
    g: Act
    agent_margins: list
    social_margin: float
    social_prior: Prior
    grid_social_margin: float
    social_value_f: float      # sum_p p u0(f) + c0(p) at social_prior
    social_value_g: float      # sum_p p u0(g) at social_prior

    @property
    def constant(self) -> bool:
        return self.f.is_constant and self.g.is_constant

    def as_dict(self) -> dict:
        return {
            "stratum": self.stratum,
            "constant_acts": self.constant,
            "f": self.f.as_dict(),
            "g": self.g.as_dict(),
            "agent_margins": list(self.agent_margins),
            "social_margin": self.social_margin,
            "social_prior": self.social_prior.tolist(),
            "grid_social_margin": self.grid_social_margin,
            "social_value_f": self.social_value_f,
            "social_value_g": self.social_value_g,
        }


@dataclass
class ParetoAuditReport:
    seed: int
    samples: int
    resolution: int
    violations: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)

    @property
    def clean(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "samples": self.samples,
            "grid_resolution": self.resolution,
            "counts": dict(self.counts),
            "violations": [v.as_dict() for v in self.violations],
        }


STRATA = ("general", "private", "constant", "dominating")
_STRATUM_WEIGHTS = np.array([0.25, 0.35, 0.2, 0.2])


def _sample_pairs(profile: Profile, n: int, rng: np.random.Generator):
    """Draw ``n`` act pairs; returns outcome arrays ``(n, S, m)`` and strata labels."""
    S, N = profile.n_states, profile.n_agents
    frame = _UtilityFrame.of(profile)
    k = frame.null_basis.shape[1]
    deltas = _private_directions(profile)
    labels = rng.choice(len(STRATA), size=n, p=_STRATUM_WEIGHTS)
    box = SAMPLE_BOX

    Uf = rng.uniform(-box, box, size=(n, S, N))
    Ug = rng.uniform(-box, box, size=(n, S, N))
    Zf = rng.uniform(-box, box, size=(n, S, k))
    Zg = rng.uniform(-box, box, size=(n, S, k))
    F = frame.outcomes(Uf, Zf)
    G = frame.outcomes(Ug, Zg)

    # private: both acts on a line parallel to one agent's private direction
    sel = labels == 1
    if np.any(sel):
        agent = rng.integers(0, N, size=n)
        base = frame.outcomes(rng.uniform(-box, box, size=(n, N)), rng.uniform(-box, box, size=(n, k)))
        tf = rng.uniform(-box, box, size=(n, S))
        tg = rng.uniform(-box, box, size=(n, S))
        line = deltas[agent]                                  # n x m
        Fp = base[:, None, :] + tf[:, :, None] * line[:, None, :]
        Gp = base[:, None, :] + tg[:, :, None] * line[:, None, :]
        F[sel], G[sel] = Fp[sel], Gp[sel]

    # constant: one outcome per act; half the pairs unanimously ordered
    sel = labels == 2
    if np.any(sel):
        ux = rng.uniform(-box, box, size=(n, N))
        ordered = rng.random(size=(n, 1)) < 0.5
        down = rng.uniform(0.0, box, size=(n, N))
        # half the unanimous drops hit a single individual only
        single = rng.random(size=n) < 0.5
        only = np.eye(N)[rng.integers(0, N, size=n)]
        down = np.where(single[:, None], down * only, down)
        uy = np.where(ordered, ux - down, rng.uniform(-box, box, size=(n, N)))
        zx = rng.uniform(-box, box, size=(n, k))
        zy = rng.uniform(-box, box, size=(n, k))
        x = frame.outcomes(ux, zx)
        y = frame.outcomes(uy, zy)
        F[sel] = np.repeat(x[:, None, :], S, axis=1)[sel]
        G[sel] = np.repeat(y[:, None, :], S, axis=1)[sel]

    # dominating: f improves on g statewise for every individual
    sel = labels == 3
    if np.any(sel):
        inc = rng.uniform(0.0, box / 2, size=(n, S, N)) * (rng.random(size=(n, S, N)) < 0.7)
        Zd = rng.uniform(-box, box, size=(n, S, k))
        Fd = frame.outcomes(Ug + inc, Zd)
        F[sel] = Fd[sel]
    return F, G, np.array(STRATA)[labels]


def _verify_pair(profile: Profile, f: Act, g: Act, eps_dec: float):
    """Exact LP margins of ``f`` over ``g`` for every preference (social first)."""
    certs = []
    for k in range(profile.n_agents + 1):
        pref = profile.preference(k)
        d = pref.utility(f.outcomes) - pref.utility(g.outcomes)
        certs.append(margin_from_diff(d, pref.perception, eps_dec))
    return certs


def _confirm(profile, f, g, stratum, grid_social, eps_dec) -> Optional[OracleViolation]:
    certs = _verify_pair(profile, f, g, eps_dec)
    social, agents = certs[0], certs[1:]
    if not all(c.holds for c in agents) or not social.margin < -10 * eps_dec:
        return None
    p = social.argmin.weights
    u0 = profile.social.utility
    vf = float(p @ u0(f.outcomes)) + profile.social.perception(p)
    vg = float(p @ u0(g.outcomes))
    return OracleViolation(stratum, f, g, [c.margin for c in agents], social.margin,
                           social.argmin, float(grid_social), vf, vg)


def sampled_pareto_audit(profile: Profile, samples: int = 10_000, seed: int = 0,
                         resolution: Optional[int] = None, inject: Sequence = (),
                         eps_dec: float = EPS_DEC, max_per_stratum: int = 10) -> ParetoAuditReport:
    """Search sampled act pairs for unanimity that society does not respect.

    Pairs are screened on the lattice (unanimous: every individual grid margin
    ``>= -eps_dec``; violating: social grid margin ``< -10 eps_dec``) and each
    candidate is re-verified with exact LP margins before it is reported.
    ``inject`` holds extra ``(f, g)`` act pairs that are always examined first.
    At most ``max_per_stratum`` confirmed violations are kept per stratum.
    """
    S = profile.n_states
    r = resolution or default_resolution(S)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    F, G, labels = _sample_pairs(profile, samples, rng)
    if inject:
        F = np.concatenate([np.stack([f.outcomes for f, _ in inject]), F])
        G = np.concatenate([np.stack([g.outcomes for _, g in inject]), G])
        labels = np.concatenate([np.array(["injected"] * len(inject)), labels])

    views = [GridView.of(profile.preference(k).perception, r) for k in range(profile.n_agents + 1)]
    uf = _utilities(profile, F)
    ug = _utilities(profile, G)
    grid = [views[k].margins(uf[k] - ug[k])[0] for k in range(profile.n_agents + 1)]
    unanimous = np.all(np.vstack(grid[1:]) >= -eps_dec, axis=0)
    candidate = unanimous & (grid[0] < -10 * eps_dec)

    report = ParetoAuditReport(seed, samples, r)
    kept: dict = {}
    rejected = 0
    for idx in np.flatnonzero(candidate):
        stratum = str(labels[idx])
        if kept.get(stratum, 0) >= max_per_stratum:
            continue
        names = ("f", "g") if stratum == "injected" else ("", "")
        if stratum == "injected":
            names = (inject[idx][0].name or "f", inject[idx][1].name or "g")
        v = _confirm(profile, Act(F[idx], names[0]), Act(G[idx], names[1]), stratum, grid[0][idx], eps_dec)
        if v is None:
            rejected += 1
            continue
        kept[stratum] = kept.get(stratum, 0) + 1
        report.violations.append(v)
    report.counts = {
        "pairs": int(F.shape[0]),
        "unanimous_on_grid": int(np.sum(unanimous)),
        "candidates": int(np.sum(candidate)),
        "rejected_by_lp": rejected,
        "confirmed": len(report.violations),
        "per_stratum": {s: int(np.sum(labels == s)) for s in (("injected",) if inject else ()) + STRATA},
    }
    return report


# ---------------------------------------------------------------------------
# liberalism on private act families
# ---------------------------------------------------------------------------


@dataclass
class LiberalismAuditReport:
    seed: int
    samples: int
    premise_holds: int
    violations: list
    candidates: int = 0

    @property
    def clean(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "samples": self.samples,
            "premise_holds": self.premise_holds,
            "candidates": self.candidates,
            "violations": [v.as_dict() for v in self.violations],
        }


def _tight_differences(c: PerceptionFunction, n: int, rng: np.random.Generator) -> np.ndarray:
    """Utility differences ``d`` with ``d . p + c(p) >= 0`` on ``dom c``, often tightly."""
    S = c.n_states
    D = rng.uniform(0.0, 1.0, size=(n, S)) * (rng.random(size=(n, 1)) < 0.5)
    kinds = rng.integers(0, 2, size=n)
    for j in range(n):
        if kinds[j] == 0 and c.n_pieces:
            k = rng.integers(0, c.n_pieces)
            D[j] += -c.G[k] - c.h[k]
        elif c.domain.A.shape[0]:
            k = rng.integers(0, c.domain.A.shape[0])
            M = rng.uniform(0.0, 4.0)
            D[j] += -M * (c.domain.A[k] - c.domain.b[k])
    return D


def sampled_liberalism_audit(profile: Profile, samples: int = 10_000, seed: int = 0,
                             resolution: Optional[int] = None, eps_dec: float = EPS_DEC,
                             max_per_agent: int = 10) -> LiberalismAuditReport:
    """Sample pairs inside each private family ``F^i`` and check deference.

    Half the pairs are uniform on the private line; the other half are built
    so that ``f >=_i g`` holds, often with equality somewhere.  At most
    ``max_per_agent`` LP-confirmed violations are kept per individual.
    """
    S, N = profile.n_states, profile.n_agents
    r = resolution or default_resolution(S)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    deltas = _private_directions(profile)
    views = [GridView.of(profile.preference(k).perception, r) for k in range(N + 1)]
    agents = rng.integers(1, N + 1, size=samples)
    tg = rng.uniform(-SAMPLE_BOX, SAMPLE_BOX, size=(samples, S))
    tf = rng.uniform(-SAMPLE_BOX, SAMPLE_BOX, size=(samples, S))
    tight = rng.random(size=samples) < 0.5
    premise, candidates, violations = 0, 0, []
    for i in range(1, N + 1):
        rows = np.flatnonzero(agents == i)
        if rows.size == 0:
            continue
        ci = profile.preference(i).perception
        tf_i = tf[rows].copy()
        t_rows = tight[rows]
        tf_i[t_rows] = tg[rows][t_rows] + _tight_differences(ci, int(np.sum(t_rows)), rng)
        delta = deltas[i - 1]
        u_i = profile.preference(i).utility
        Fo = tf_i[:, :, None] * delta
        Go = tg[rows][:, :, None] * delta
        di = u_i(Fo) - u_i(Go)
        mi, _ = views[i].margins(di)
        ok = mi >= -eps_dec
        premise += int(np.sum(ok))
        u0 = profile.social.utility
        m0, _ = views[0].margins(u0(Fo) - u0(Go))
        flagged = np.flatnonzero(ok & (m0 < -10 * eps_dec))
        candidates += int(flagged.size)
        kept = 0
        for j in flagged:
            if kept >= max_per_agent:
                break
            f, g = Act(Fo[j], "f"), Act(Go[j], "g")
            ci_cert = margin_from_diff(di[j], ci, eps_dec)
            c0_cert = margin_from_diff(u0(Fo[j]) - u0(Go[j]), profile.social.perception, eps_dec)
            if ci_cert.holds and c0_cert.margin < -10 * eps_dec:
                kept += 1
                p = c0_cert.argmin.weights
                violations.append(OracleViolation(
                    f"private-{i}", f, g, [ci_cert.margin], c0_cert.margin, c0_cert.argmin,
                    float(m0[j]), float(p @ u0(Fo[j])) + profile.social.perception(p),
                    float(p @ u0(Go[j]))))
    return LiberalismAuditReport(seed, samples, premise, violations, candidates)


# ---------------------------------------------------------------------------
# intransitivity search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Intransitivity:
    f: np.ndarray    # utility values per state
    g: np.ndarray
    h: np.ndarray
    margin_fg: float
    margin_gh: float
    margin_fh: float


def find_intransitivity(u: AffineUtility, c: PerceptionFunction, samples: int = 100_000,
                        seed: int = 0, box: float = 4.0, resolution: Optional[int] = None,
                        eps_dec: float = EPS_DEC, chunk: int = 10_000) -> Optional[Intransitivity]:
    """Search utility-value triples for ``f >= g``, ``g >= h`` but not ``f >= h``.

    Returns the first triple (in sample order) whose three margins are
    confirmed by LP, or ``None``; absence is not a proof of transitivity.
    """
    S = c.n_states
    r = resolution or default_resolution(S)
    view = GridView.of(c, r)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        Fv, Gv, Hv = (rng.uniform(-box, box, size=(n, S)) for _ in range(3))
        done += n
        mfg, _ = view.margins(Fv - Gv)
        mgh, _ = view.margins(Gv - Hv)
        mfh, _ = view.margins(Fv - Hv)
        distinct = np.any(Fv != Gv, axis=1) | np.any(Gv != Hv, axis=1)
        cand = distinct & (mfg >= -eps_dec) & (mgh >= -eps_dec) & (mfh < -10 * eps_dec)
        for j in np.flatnonzero(cand):
            a = margin_from_diff(Fv[j] - Gv[j], c, eps_dec)
            b = margin_from_diff(Gv[j] - Hv[j], c, eps_dec)
            z = margin_from_diff(Fv[j] - Hv[j], c, eps_dec)
            if a.holds and b.holds and z.margin < -10 * eps_dec:
                return Intransitivity(Fv[j].copy(), Gv[j].copy(), Hv[j].copy(),
                                      a.margin, b.margin, z.margin)
    return None


def acts_from_values(u: AffineUtility, values) -> Act:
    """An act whose utility in each state equals ``values`` (along the gradient)."""
    values = np.asarray(values, dtype=float)
    g = u.gradient
    return Act(np.outer((values - u.intercept) / float(g @ g), g))


def verify_separation_on_grid(sep, profile: Profile, resolution: int) -> float:
    """Smallest ``p . v + k a c_i(p) - lam`` over lattice priors in ``dom c_i``."""
    ci = profile.preference(sep.agent).perception
    view = GridView.of(ci, resolution)
    if view.empty:
        return INF
    vals = view.priors @ sep.v + sep.kappa * sep.alpha * view.values - sep.lam
    return float(np.min(vals))
