import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from varbewley import Act, AffineUtility, PerceptionFunction, Polyhedron, Relation
from varbewley.generators import random_perception
from varbewley.preference import (
    DimensionMismatch,
    EPS_DEC,
    compare,
    dominance,
    margin_from_diff,
    mixture,
    relation,
)

COORD = AffineUtility.of([1.0])


def values_act(vals):
    """A one-dimensional act whose coordinate utility equals ``vals``."""
    return Act.of(np.asarray(vals, dtype=float)[:, None])


class TestExamples:
    def test_agent_one_indifferent(self, example1):
        a = example1.preference(1)
        f, g = example1.act("f"), example1.act("g")
        fwd = dominance(a.utility, a.perception, f, g)
        bwd = dominance(a.utility, a.perception, g, f)
        assert fwd.holds and bwd.holds
        assert fwd.margin == pytest.approx(0, abs=1e-9) and bwd.margin == pytest.approx(0, abs=1e-9)

    def test_social_strictly_dispreferred(self, example1):
        s = example1.social
        f, g = example1.act("f"), example1.act("g")
        cert = dominance(s.utility, s.perception, f, g)
        assert cert.margin == pytest.approx(-1.0, abs=1e-9)
        np.testing.assert_allclose(cert.argmin.weights, [0, 1], atol=1e-9)
        assert cert.objective_at(cert.argmin, s.perception) == pytest.approx(cert.margin, abs=1e-9)
        assert relation(s.utility, s.perception, f, g) is Relation.STRICTLY_DISPREFERRED

    def test_self_is_indifferent(self, example1):
        s = example1.social
        f = example1.act("f")
        assert relation(s.utility, s.perception, f, f) is Relation.INDIFFERENT

    def test_incomparable_with_flat_perception(self):
        c = PerceptionFunction.from_pieces([], n_states=2)
        cmp = compare(COORD, c, values_act([1, -1]), values_act([0, 0]))
        assert cmp.relation is Relation.INCOMPARABLE
        assert cmp.forward.margin == pytest.approx(-1) and cmp.backward.margin == pytest.approx(-1)

    def test_dimension_mismatch(self, example1):
        s = example1.social
        with pytest.raises(DimensionMismatch):
            dominance(s.utility, s.perception, Act.of([[0, 0, 0]]), example1.act("f"))


class TestMixture:
    def test_identity(self):
        f = values_act([0, 2])
        np.testing.assert_array_equal(mixture(f, f, 0.5).outcomes, f.outcomes)

    def test_affine_values(self):
        m = mixture(values_act([0, 2]), values_act([4, 0]), 0.5)
        np.testing.assert_allclose(COORD(m.outcomes), [2, 1])

    @pytest.mark.parametrize("w", [0.0, 1.0, -0.2, 1.5])
    def test_weight_range(self, w):
        with pytest.raises(ValueError):
            mixture(values_act([0]), values_act([1]), w)

    def test_example_agent_independence(self, example1):
        rng = np.random.default_rng(11)
        a = example1.preference(1)
        f, g = example1.act("f"), example1.act("g")
        for _ in range(20):
            h = Act.of(rng.uniform(-5, 5, size=(2, 3)))
            lam = float(rng.uniform(0.05, 0.95))
            assert dominance(a.utility, a.perception, mixture(f, h, lam), mixture(g, h, lam)).holds


# --- properties of the relation ------------------------------------------------

seeds = st.integers(0, 2**32 - 1)


def _instance(seed, bewley=False):
    rng = np.random.default_rng(seed)
    S = int(rng.integers(2, 5))
    if bewley:
        anchor = rng.dirichlet(np.ones(S))
        A = rng.uniform(-1, 1, size=(2, S))
        c = PerceptionFunction.indicator(Polyhedron(A, A @ anchor + 0.1, S))
    else:
        c = random_perception(rng, S, 4, int(rng.integers(0, 2)))
    return rng, S, c


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_reflexive(seed):
    rng, S, c = _instance(seed)
    assert margin_from_diff(np.zeros(S), c).holds


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_statewise_dominance(seed):
    rng, S, c = _instance(seed)
    d = rng.uniform(0, 3, size=S) * (rng.random(S) < 0.6)
    assert margin_from_diff(d, c).holds


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_constant_acts_compare_by_utility(seed):
    rng, S, c = _instance(seed)
    x, y = rng.uniform(-4, 4, size=2)
    cmp = compare(COORD, c, values_act([x] * S), values_act([y] * S))
    assert cmp.relation is not Relation.INCOMPARABLE
    assert cmp.forward.margin == pytest.approx(x - y, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_one_direction_independence(seed):
    rng, S, c = _instance(seed)
    f, g, h = (rng.uniform(-4, 4, size=S) for _ in range(3))
    # shift f up just enough that f >= g holds
    m = margin_from_diff(f - g, c).margin
    f = f + max(0.0, -m)
    assert margin_from_diff(f - g, c).margin >= -EPS_DEC
    lam = float(rng.uniform(0.01, 0.99))
    mf = lam * f + (1 - lam) * h
    mg = lam * g + (1 - lam) * h
    assert margin_from_diff(mf - mg, c).holds


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_bewley_is_transitive(seed):
    rng, S, c = _instance(seed, bewley=True)
    f, g, h = (rng.uniform(-4, 4, size=S) for _ in range(3))
    if margin_from_diff(f - g, c).holds and margin_from_diff(g - h, c).holds:
        assert margin_from_diff(f - h, c).margin >= -2 * EPS_DEC


def test_failed_certificate_reproduces_margin():
    rng = np.random.default_rng(5)
    for _ in range(100):
        S = int(rng.integers(2, 5))
        c = random_perception(rng, S, 4, 1)
        d = rng.uniform(-3, 3, size=S)
        cert = margin_from_diff(d, c)
        if not cert.holds:
            assert cert.margin < -EPS_DEC
            assert abs(cert.objective_at(cert.argmin, c) - cert.margin) <= 1e-9
