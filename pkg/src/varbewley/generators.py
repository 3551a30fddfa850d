"""Seeded random polyhedral profiles for property suites and benchmarks.

Each builder draws from a ``numpy.random.Generator`` so a seed pins the whole
profile.  Profiles come in a few families: unconstrained random data, and
families satisfying a sufficient condition for Pareto by construction.
"""

from __future__ import annotations

import numpy as np

from .model import (
    AffineUtility,
    PerceptionFunction,
    Polyhedron,
    Preference,
    Profile,
    make_profile,
)


def _states(S: int) -> tuple:
    return tuple(f"s{j}" for j in range(S))


def independent_gradients(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    while True:
        Gm = rng.normal(size=(n, m))
        if np.linalg.svd(Gm, compute_uv=False)[-1] > 0.1:
            return Gm


def interior_prior(rng: np.random.Generator, S: int) -> np.ndarray:
    return rng.dirichlet(np.full(S, 2.0))


def domain_around(rng: np.random.Generator, anchor: np.ndarray, n_rows: int) -> Polyhedron:
    """Random half-spaces each containing ``anchor`` with some room to spare."""
    S = anchor.shape[0]
    A = rng.uniform(-1.0, 1.0, size=(n_rows, S))
    b = A @ anchor + rng.uniform(0.05, 0.5, size=n_rows)
    return Polyhedron(A, b, S)


def random_perception(rng: np.random.Generator, S: int, max_pieces: int = 4,
                      domain_rows: int = 0, anchor=None) -> PerceptionFunction:
    """Random pieces, shifted so the minimum over the domain is zero."""
    k = int(rng.integers(1, max_pieces + 1))
    G = rng.uniform(-2.0, 2.0, size=(k, S))
    h = rng.uniform(-1.0, 1.0, size=k)
    if domain_rows:
        anchor = interior_prior(rng, S) if anchor is None else anchor
        domain = domain_around(rng, anchor, domain_rows)
    else:
        domain = Polyhedron.full(S)
    return PerceptionFunction.normalized(G, h, domain)


def zero_at(rng: np.random.Generator, anchor: np.ndarray, max_pieces: int = 4,
            domain_rows: int = 0) -> PerceptionFunction:
    """A perception function vanishing on a neighbourhood of ``anchor``.

    Every piece is strictly negative at ``anchor`` and a zero piece is added,
    so ``min c = 0`` is attained there.
    """
    S = anchor.shape[0]
    k = int(rng.integers(1, max_pieces))
    G = rng.uniform(-3.0, 3.0, size=(k, S))
    h = -(G @ anchor) - rng.uniform(0.02, 0.3, size=k)
    G = np.vstack([G, np.zeros(S)])
    h = np.append(h, 0.0)
    domain = domain_around(rng, anchor, domain_rows) if domain_rows else Polyhedron.full(S)
    return PerceptionFunction(G, h, domain)


def _utilities(rng, n, m, alpha, intercepts=True):
    Gm = independent_gradients(rng, n, m)
    b = rng.uniform(-1.0, 1.0, size=n) if intercepts else np.zeros(n)
    us = [AffineUtility(Gm[i], float(b[i])) for i in range(n)]
    beta = float(rng.uniform(-1.0, 1.0))
    u0 = AffineUtility(alpha @ Gm, float(alpha @ b + beta))
    return us, u0


def random_weights(rng: np.random.Generator, n: int, negative: bool = False) -> np.ndarray:
    alpha = rng.uniform(0.1, 2.0, size=n)
    alpha[rng.random(size=n) < 0.2] = 0.0
    if not np.any(alpha):
        alpha[0] = 1.0
    if negative:
        alpha[rng.integers(0, n)] = -rng.uniform(0.1, 1.0)
    return alpha


def random_profile(rng: np.random.Generator, S: int, n: int, negative: bool = False,
                   max_pieces: int = 4) -> Profile:
    """Unconstrained data; ``negative`` forces one negative utilitarian weight."""
    m = n + 1
    alpha = random_weights(rng, n, negative)
    us, u0 = _utilities(rng, n, m, alpha)
    agents = [Preference(u, random_perception(rng, S, max_pieces, int(rng.integers(0, 2))))
              for u in us]
    social = Preference(u0, random_perception(rng, S, max_pieces, int(rng.integers(0, 2))))
    return make_profile(_states(S), agents, social)


def bewley_social_profile(rng: np.random.Generator, S: int, n: int) -> Profile:
    """Bewley planner whose prior set lies inside every individual zero set."""
    anchor = interior_prior(rng, S)
    alpha = random_weights(rng, n)
    us, u0 = _utilities(rng, n, n + 1, alpha)
    cs = [zero_at(rng, anchor, 4, int(rng.integers(0, 2))) for _ in range(n)]
    rows_A = [np.vstack([c.domain.A, c.G]) for c in cs]
    rows_b = [np.concatenate([c.domain.b, -c.h]) for c in cs]
    P0 = Polyhedron(np.vstack(rows_A), np.concatenate(rows_b), S)
    agents = [Preference(u, c) for u, c in zip(us, cs)]
    return make_profile(_states(S), agents, Preference(u0, PerceptionFunction.indicator(P0)))


def bewley_agents_profile(rng: np.random.Generator, S: int, n: int) -> Profile:
    """Bewley individuals; the social domain is the intersection of their prior sets."""
    anchor = interior_prior(rng, S)
    alpha = random_weights(rng, n)
    us, u0 = _utilities(rng, n, n + 1, alpha)
    sets = [domain_around(rng, anchor, int(rng.integers(1, 3))) for _ in range(n)]
    dom0 = sets[0].intersect(*sets[1:])
    k = int(rng.integers(1, 5))
    c0 = PerceptionFunction.normalized(rng.uniform(-2, 2, size=(k, S)), rng.uniform(-1, 1, size=k), dom0)
    agents = [Preference(u, PerceptionFunction.indicator(P)) for u, P in zip(us, sets)]
    return make_profile(_states(S), agents, Preference(u0, c0))


def dominating_social_profile(rng: np.random.Generator, S: int, n: int) -> Profile:
    """``c0 >= max_i a_i c_i`` by construction, plus extra pieces of its own."""
    anchor = interior_prior(rng, S)
    alpha = random_weights(rng, n)
    us, u0 = _utilities(rng, n, n + 1, alpha)
    cs = [zero_at(rng, anchor, 4, int(rng.integers(0, 2))) for _ in range(n)]
    G = [a * c.G for a, c in zip(alpha, cs)]
    h = [a * c.h for a, c in zip(alpha, cs)]
    extra = zero_at(rng, anchor, 3)
    G.append(extra.G)
    h.append(extra.h)
    dom = cs[0].domain.intersect(*[c.domain for c in cs[1:]])
    c0 = PerceptionFunction(np.vstack(G), np.concatenate(h), dom)
    agents = [Preference(u, c) for u, c in zip(us, cs)]
    return make_profile(_states(S), agents, Preference(u0, c0))
