"""Priors, polyhedra, perception functions, utilities, acts and profiles.

A perception function is stored in polyhedral form: a list of affine pieces
``g_k . p + h_k`` whose maximum gives the value on the effective domain, and
a polyhedron (intersected with the simplex) as that domain.  An empty piece
list means the function is ``0`` on its domain, i.e. a Bewley prior set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .lp import EPS_FEAS, LE, EQ, LpOutcome, Status, minimize

INF = float("inf")


class ValidationError(ValueError):
    """A single object failed one of its invariants."""


@dataclass(frozen=True)
class ProfileIssue:
    agent: Optional[int]   # 0 = social, 1..n = individuals, None = profile level
    invariant: str
    message: str

    def as_dict(self) -> dict:
        return {"agent": self.agent, "invariant": self.invariant, "message": self.message}


class ProfileError(ValueError):
    """Raised by :func:`validate_profile`; ``errors`` lists every violation."""

    def __init__(self, errors: Sequence[ProfileIssue]):
        self.errors = list(errors)
        super().__init__("; ".join(e.message for e in self.errors))


# ---------------------------------------------------------------------------
# priors and polyhedra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Prior:
    weights: np.ndarray

    @classmethod
    def of(cls, weights, tol: float = EPS_FEAS) -> "Prior":
        """Validate ``weights`` as a point of the simplex, clamping tiny negatives."""
        w = np.asarray(weights, dtype=float).ravel()
        if w.size == 0 or not np.all(np.isfinite(w)):
            raise ValidationError("prior must be a non-empty finite vector")
        if np.min(w) < -tol:
            raise ValidationError(f"prior weight {np.min(w):.3g} is negative")
        w = np.maximum(w, 0.0)
        if abs(w.sum() - 1.0) > tol:
            raise ValidationError(f"prior weights sum to {w.sum():.12g}, not 1")
        return cls(w)

    def __len__(self):
        return self.weights.shape[0]

    def tolist(self):
        return self.weights.tolist()


def minimize_over_priors(
    n_states: int,
    p_cost,
    polyhedra: Sequence["Polyhedron"] = (),
    pieces: Optional[tuple] = None,
    t_cost: float = 1.0,
) -> LpOutcome:
    """Minimise ``p_cost . p (+ t_cost * t)`` over priors in the given polyhedra.

    When ``pieces = (G, h)`` is given, an epigraph variable ``t >= G p + h``
    is added; with ``t_cost > 0`` it equals the piece maximum at the optimum.
    Rows are used exactly; only if that program is infeasible are they relaxed
    by ``EPS_FEAS`` (domains are accepted when they meet the simplex within
    that tolerance).  Relaxing unconditionally would leak ``EPS_FEAS`` times
    the objective scale into every margin.
    """
    out = _prior_program(n_states, p_cost, polyhedra, pieces, t_cost, 0.0)
    if out.status is Status.INFEASIBLE and any(p.A.shape[0] for p in polyhedra):
        out = _prior_program(n_states, p_cost, polyhedra, pieces, t_cost, EPS_FEAS)
    return out


def _prior_program(n_states, p_cost, polyhedra, pieces, t_cost, relax) -> LpOutcome:
    S = n_states
    use_t = pieces is not None and len(pieces[1]) > 0
    width = S + 1 if use_t else S
    cost = np.zeros(width)
    cost[:S] = p_cost
    rows = [(np.r_[np.ones(S), np.zeros(width - S)], EQ, 1.0)]
    for poly in polyhedra:
        for a, b in zip(poly.A, poly.b):
            rows.append((np.r_[a, np.zeros(width - S)], LE, b + relax))
    free = np.zeros(width, dtype=bool)
    if use_t:
        G, h = pieces
        cost[S] = t_cost
        free[S] = True
        for g, hk in zip(G, h):
            rows.append((np.r_[g, -1.0], LE, -hk))
    return minimize(cost, rows, free=free)


@dataclass(frozen=True, eq=False)
class Polyhedron:
    """``{p in simplex : A p <= b}``; nonempty by construction."""

    A: np.ndarray
    b: np.ndarray
    n_states: int

    def __post_init__(self):
        if self.A.ndim != 2 or self.A.shape[1] != self.n_states or self.b.shape != (self.A.shape[0],):
            raise ValidationError("polyhedron rows do not match the state count")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b))):
            raise ValidationError("polyhedron rows must be finite")
        slack = self.infeasibility()
        if slack > EPS_FEAS:
            raise ValidationError(
                f"polyhedron does not meet the simplex (minimum violation {slack:.3g})"
            )

    @classmethod
    def from_rows(cls, rows, n_states: int) -> "Polyhedron":
        rows = list(rows)
        A = np.array([np.asarray(a, dtype=float) for a, _ in rows]).reshape(len(rows), n_states)
        b = np.array([float(b) for _, b in rows])
        return cls(A, b, n_states)

    @classmethod
    def full(cls, n_states: int) -> "Polyhedron":
        return cls(np.zeros((0, n_states)), np.zeros(0), n_states)

    def infeasibility(self) -> float:
        """Smallest uniform relaxation of the rows that meets the simplex."""
        if self.A.shape[0] == 0:
            return 0.0
        S = self.n_states
        rows = [(np.r_[np.ones(S), 0.0], EQ, 1.0)]
        rows += [(np.r_[a, -1.0], LE, b) for a, b in zip(self.A, self.b)]
        out = minimize(np.r_[np.zeros(S), 1.0], rows)
        return out.value

    @property
    def is_full(self) -> bool:
        return self.A.shape[0] == 0

    def violation(self, p) -> float:
        """Largest row violation ``max(A p - b)`` (``-inf`` for no rows)."""
        if self.A.shape[0] == 0:
            return -INF
        return float(np.max(self.A @ np.asarray(p, dtype=float) - self.b))

    def contains(self, p, tol: float = EPS_FEAS) -> bool:
        return self.violation(p) <= tol

    def mask(self, priors: np.ndarray, tol: float = EPS_FEAS) -> np.ndarray:
        if self.A.shape[0] == 0:
            return np.ones(priors.shape[0], dtype=bool)
        return np.all(priors @ self.A.T - self.b <= tol, axis=1)

    def intersect(self, *others: "Polyhedron") -> "Polyhedron":
        A = np.vstack([self.A] + [o.A for o in others])
        b = np.concatenate([self.b] + [o.b for o in others])
        return Polyhedron(A, b, self.n_states)

    def rows(self):
        return [(a.copy(), float(b)) for a, b in zip(self.A, self.b)]


def polyhedra_meet(polys: Sequence[Polyhedron]) -> bool:
    """Whether the polyhedra have a common prior (within ``EPS_FEAS``)."""
    polys = list(polys)
    if not polys:
        return True
    A = np.vstack([p.A for p in polys])
    b = np.concatenate([p.b for p in polys])
    try:
        Polyhedron(A, b, polys[0].n_states)
    except ValidationError:
        return False
    return True


# ---------------------------------------------------------------------------
# perception functions
# ---------------------------------------------------------------------------


def _perception_min(G, h, domain: Polyhedron):
    if G.shape[0] == 0:
        out = minimize_over_priors(domain.n_states, np.zeros(domain.n_states), [domain])
        return 0.0, out.x[: domain.n_states]
    out = minimize_over_priors(domain.n_states, np.zeros(domain.n_states), [domain], pieces=(G, h))
    return out.value, out.x[: domain.n_states]


@dataclass(frozen=True, eq=False)
class PerceptionFunction:
    """``c(p) = max_k G[k] . p + h[k]`` on ``domain``, ``+inf`` elsewhere."""

    G: np.ndarray
    h: np.ndarray
    domain: Polyhedron
    minimum: float = field(init=False)
    argmin: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        S = self.domain.n_states
        if self.G.ndim != 2 or self.G.shape[1] != S or self.h.shape != (self.G.shape[0],):
            raise ValidationError("perception pieces do not match the state count")
        if not (np.all(np.isfinite(self.G)) and np.all(np.isfinite(self.h))):
            raise ValidationError("perception pieces must be finite")
        value, arg = _perception_min(self.G, self.h, self.domain)
        object.__setattr__(self, "minimum", value)
        object.__setattr__(self, "argmin", arg)
        if abs(value) > EPS_FEAS:
            raise ValidationError(f"min c = 0 violated (LP minimum {round(value, 12)})")

    @classmethod
    def from_pieces(cls, pieces=(), domain: Optional[Polyhedron] = None, n_states: Optional[int] = None):
        """Build from ``(g, h)`` pairs; ``domain`` defaults to the whole simplex."""
        pieces = list(pieces)
        if domain is None:
            if n_states is None:
                n_states = len(pieces[0][0])
            domain = Polyhedron.full(n_states)
        S = domain.n_states
        G = np.array([np.asarray(g, dtype=float) for g, _ in pieces]).reshape(len(pieces), S)
        h = np.array([float(hk) for _, hk in pieces])
        return cls(G, h, domain)

    @classmethod
    def normalized(cls, G, h, domain: Polyhedron) -> "PerceptionFunction":
        """Shift the offsets so the minimum over the domain is exactly zero."""
        G = np.asarray(G, dtype=float).reshape(-1, domain.n_states)
        h = np.asarray(h, dtype=float).ravel()
        value, _ = _perception_min(G, h, domain)
        return cls(G, h - value, domain)

    @classmethod
    def indicator(cls, prior_set: Polyhedron) -> "PerceptionFunction":
        """The Bewley encoding: ``0`` on ``prior_set``, ``+inf`` off it."""
        return cls(np.zeros((0, prior_set.n_states)), np.zeros(0), prior_set)

    @property
    def n_states(self) -> int:
        return self.domain.n_states

    @property
    def n_pieces(self) -> int:
        return self.G.shape[0]

    def __call__(self, p) -> float:
        return evaluate_perception(self, p)

    def values(self, priors: np.ndarray) -> np.ndarray:
        """Vectorised evaluation over rows of ``priors`` (``inf`` off-domain)."""
        priors = np.atleast_2d(priors)
        if self.G.shape[0]:
            vals = np.max(priors @ self.G.T + self.h, axis=1)
        else:
            vals = np.zeros(priors.shape[0])
        return np.where(self.domain.mask(priors), vals, INF)

    def is_bewley(self, tol: float = EPS_FEAS) -> bool:
        """True when ``c`` only takes the values 0 and ``+inf``.

        Checked semantically: each piece's maximum over the domain is ``<= tol``.
        """
        S = self.n_states
        for g, hk in zip(self.G, self.h):
            out = minimize_over_priors(S, -g, [self.domain])
            if -out.value + hk > tol:
                return False
        return True

    def as_dict(self) -> dict:
        return {
            "pieces": [{"g": g.tolist(), "h": float(hk)} for g, hk in zip(self.G, self.h)],
            "domain": [{"a": a.tolist(), "b": float(b)} for a, b in zip(self.domain.A, self.domain.b)],
        }


def evaluate_perception(c: PerceptionFunction, p) -> float:
    """``c(p)``: ``+inf`` when ``p`` breaks a domain row by more than ``EPS_FEAS``."""
    w = p.weights if isinstance(p, Prior) else np.asarray(p, dtype=float)
    if not c.domain.contains(w):
        return INF
    if c.G.shape[0] == 0:
        return 0.0
    return float(np.max(c.G @ w + c.h))


def zero_set(c: PerceptionFunction) -> Polyhedron:
    """The most-plausible priors ``{p : c(p) = 0}`` as a polyhedron."""
    A = np.vstack([c.domain.A, c.G])
    b = np.concatenate([c.domain.b, -c.h])
    return Polyhedron(A, b, c.n_states)


# ---------------------------------------------------------------------------
# utilities, acts, profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AffineUtility:
    gradient: np.ndarray
    intercept: float = 0.0

    def __post_init__(self):
        if self.gradient.ndim != 1 or not np.all(np.isfinite(self.gradient)):
            raise ValidationError("utility gradient must be a finite vector")
        if not np.isfinite(self.intercept):
            raise ValidationError("utility intercept must be finite")
        if not np.any(self.gradient != 0.0):
            raise ValidationError("gradient ≠ 0 violated")

    @classmethod
    def of(cls, gradient, intercept: float = 0.0) -> "AffineUtility":
        return cls(np.asarray(gradient, dtype=float).ravel(), float(intercept))

    @property
    def dim(self) -> int:
        return self.gradient.shape[0]

    def __call__(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.gradient + self.intercept

    def as_dict(self) -> dict:
        return {"gradient": self.gradient.tolist(), "intercept": float(self.intercept)}


@dataclass(frozen=True, eq=False)
class Act:
    """One outcome vector per state (an ``S x m`` array)."""

    outcomes: np.ndarray
    name: str = ""

    @classmethod
    def of(cls, outcomes, name: str = "") -> "Act":
        arr = np.atleast_2d(np.asarray(outcomes, dtype=float))
        if not np.all(np.isfinite(arr)):
            raise ValidationError("act outcomes must be finite")
        return cls(arr, name)

    @classmethod
    def constant(cls, x, n_states: int, name: str = "") -> "Act":
        x = np.asarray(x, dtype=float).ravel()
        return cls(np.tile(x, (n_states, 1)), name)

    @property
    def n_states(self) -> int:
        return self.outcomes.shape[0]

    @property
    def dim(self) -> int:
        return self.outcomes.shape[1]

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.outcomes == self.outcomes[0]))

    def as_dict(self) -> dict:
        d = {"outcomes": self.outcomes.tolist()}
        if self.name:
            d = {"name": self.name, **d}
        return d


@dataclass(frozen=True, eq=False)
class Preference:
    utility: AffineUtility
    perception: PerceptionFunction

    def as_dict(self) -> dict:
        return {"utility": self.utility.as_dict(), "perception": self.perception.as_dict()}


@dataclass(frozen=True, eq=False)
class Profile:
    """Individuals ``1..n`` plus the social preference at index ``0``."""

    states: tuple
    outcome_dim: int
    agents: tuple
    social: Preference
    acts: tuple = ()

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    def preference(self, k: int) -> Preference:
        """``0`` is the social preference; ``1..n`` are the individuals."""
        if k == 0:
            return self.social
        if 1 <= k <= len(self.agents):
            return self.agents[k - 1]
        raise IndexError(f"unknown agent {k}; profile has agents 1..{len(self.agents)} and 0")

    @property
    def gradient_matrix(self) -> np.ndarray:
        """Individual utility gradients as rows (``n x m``)."""
        return np.vstack([a.utility.gradient for a in self.agents])

    def act(self, name: str) -> Act:
        for a in self.acts:
            if a.name == name:
                return a
        raise KeyError(name)

    def as_dict(self) -> dict:
        d = {
            "format_version": 1,
            "states": list(self.states),
            "outcome_dim": self.outcome_dim,
            "agents": [a.as_dict() for a in self.agents],
            "social": self.social.as_dict(),
        }
        if self.acts:
            d["acts"] = [a.as_dict() for a in self.acts]
        return d


# ---------------------------------------------------------------------------
# validation of raw documents
# ---------------------------------------------------------------------------


def _who(k: int) -> str:
    return "social (agent 0)" if k == 0 else f"agent {k}"


def _vector(value, length, what):
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != length:
        raise ValidationError(f"{what} must have length {length}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what} must be finite")
    return arr


def _parse_preference(raw, k, S, m, errors):
    if not isinstance(raw, dict):
        errors.append(ProfileIssue(k, "structure", f"{_who(k)}: preference must be an object"))
        return None
    utility = perception = None
    try:
        u = raw["utility"]
        grad = _vector(u["gradient"], m, "utility gradient")
        intercept = float(u.get("intercept", 0.0))
        if not np.any(grad != 0.0):
            errors.append(ProfileIssue(k, "gradient_nonzero", f"gradient ≠ 0 violated for agent {k}"))
        else:
            utility = AffineUtility(grad, intercept)
    except (KeyError, TypeError, ValueError) as exc:
        errors.append(ProfileIssue(k, "structure", f"{_who(k)}: bad utility ({exc})"))
    try:
        c = raw.get("perception", {}) or {}
        pieces = [(_vector(pc["g"], S, "piece gradient"), float(pc["h"])) for pc in c.get("pieces", [])]
        drows = [(_vector(r["a"], S, "domain row"), float(r["b"])) for r in c.get("domain", [])]
    except (KeyError, TypeError, ValueError) as exc:
        errors.append(ProfileIssue(k, "structure", f"{_who(k)}: bad perception ({exc})"))
        return None
    try:
        domain = Polyhedron.from_rows(drows, S)
    except ValidationError as exc:
        errors.append(ProfileIssue(k, "domain_nonempty", f"domain ∩ Δ(S) nonempty violated for agent {k}: {exc}"))
        return None
    G = np.array([g for g, _ in pieces]).reshape(len(pieces), S)
    h = np.array([hk for _, hk in pieces])
    try:
        perception = PerceptionFunction(G, h, domain)
    except ValidationError:
        value, _ = _perception_min(G, h, domain)
        errors.append(ProfileIssue(
            k, "min_zero", f"min c = 0 violated (agent {k}, LP minimum {round(value, 12)})"))
        return None
    if utility is None:
        return None
    return Preference(utility, perception)


def validate_profile(raw: dict) -> Profile:
    """Turn a raw profile document into a :class:`Profile`.

    Every violated invariant is collected; if any, :class:`ProfileError` is
    raised carrying one :class:`ProfileIssue` per violation.
    """
    errors: list[ProfileIssue] = []
    if not isinstance(raw, dict):
        raise ProfileError([ProfileIssue(None, "structure", "profile document must be an object")])
    for key in ("states", "outcome_dim", "agents", "social"):
        if key not in raw:
            errors.append(ProfileIssue(None, "structure", f"missing key {key!r}"))
    if errors:
        raise ProfileError(errors)
    version = raw.get("format_version", 1)
    if version != 1:
        raise ProfileError([ProfileIssue(None, "format_version", f"unsupported format_version {version!r}")])
    states = tuple(str(s) for s in raw["states"])
    S = len(states)
    try:
        m = int(raw["outcome_dim"])
    except (TypeError, ValueError):
        raise ProfileError([ProfileIssue(None, "structure", "outcome_dim must be an integer")])
    if S < 1:
        errors.append(ProfileIssue(None, "states", "at least one state is required"))
    if m < 1:
        errors.append(ProfileIssue(None, "outcome_dim", "outcome_dim must be positive"))
    agents_raw = raw["agents"]
    if not isinstance(agents_raw, list):
        errors.append(ProfileIssue(None, "structure", "agents must be a list"))
        agents_raw = []
    if len(agents_raw) < 2:
        errors.append(ProfileIssue(None, "n_ge_2", f"n ≥ 2 violated (n = {len(agents_raw)})"))
    if errors:
        raise ProfileError(errors)

    social = _parse_preference(raw["social"], 0, S, m, errors)
    agents = [_parse_preference(a, k, S, m, errors) for k, a in enumerate(agents_raw, start=1)]

    acts = []
    for j, a in enumerate(raw.get("acts", []) or []):
        try:
            acts.append(parse_act(a, S, m, default_name=f"act{j}"))
        except (KeyError, TypeError, ValueError) as exc:
            errors.append(ProfileIssue(None, "acts", f"act {j}: {exc}"))
    if errors:
        raise ProfileError(errors)
    return Profile(states, m, tuple(agents), social, tuple(acts))


def parse_act(raw, n_states: int, outcome_dim: int, default_name: str = "") -> Act:
    outcomes = np.asarray(raw["outcomes"], dtype=float)
    if outcomes.shape != (n_states, outcome_dim):
        raise ValidationError(
            f"act outcomes have shape {outcomes.shape}, expected ({n_states}, {outcome_dim})"
        )
    return Act.of(outcomes, str(raw.get("name", default_name)))


def make_profile(states, agents, social, acts=()) -> Profile:
    """Assemble a profile from already-built preferences, checking dimensions."""
    states = tuple(states)
    agents = tuple(agents)
    if len(agents) < 2:
        raise ValidationError(f"n ≥ 2 violated (n = {len(agents)})")
    m = social.utility.dim
    for k, pref in enumerate((social,) + agents):
        if pref.utility.dim != m:
            raise ValidationError(f"{_who(k)}: utility dimension {pref.utility.dim} != {m}")
        if pref.perception.n_states != len(states):
            raise ValidationError(f"{_who(k)}: perception over {pref.perception.n_states} states")
    return Profile(states, m, agents, social, tuple(acts))
