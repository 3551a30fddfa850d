import dataclasses

import numpy as np
import pytest

from varbewley import AffineUtility, PerceptionFunction, Polyhedron, Preference, make_profile
from varbewley.audit import check_theorem1_condition, decompose_utility
from varbewley.generators import random_profile
from varbewley.oracle import verify_separation_on_grid
from varbewley.witness import (
    DiversityFails,
    InvalidViolation,
    VerificationFailed,
    build_separation,
    construct_witness,
    diversity_witnesses,
    forge,
)

FLAT = PerceptionFunction.from_pieces([], n_states=2)


def _violation(profile):
    d = decompose_utility(profile)
    return d, check_theorem1_condition(profile, d).violation


def test_private_directions(example1):
    dw = diversity_witnesses(example1)
    np.testing.assert_allclose(dw.directions[0], [2 / 3, -1 / 3, 1 / 3], atol=1e-12)
    np.testing.assert_allclose(example1.gradient_matrix @ dw.directions.T, np.eye(2), atol=1e-12)


def test_coordinate_utilities_give_unit_directions():
    us = [AffineUtility.of(np.eye(3)[i]) for i in range(3)]
    p = make_profile(("a", "b"), [Preference(u, FLAT) for u in us],
                     Preference(AffineUtility.of([1, 1, 1]), FLAT))
    np.testing.assert_allclose(diversity_witnesses(p).directions, np.eye(3), atol=1e-12)


def test_duplicated_agents_fail():
    u = AffineUtility.of([1, 1])
    p = make_profile(("a", "b"), [Preference(u, FLAT), Preference(u, FLAT)],
                     Preference(AffineUtility.of([2, 2]), FLAT))
    with pytest.raises(DiversityFails):
        diversity_witnesses(p)


def test_piece_separation(flatzero):
    d, v = _violation(flatzero)
    sep = build_separation(flatzero, d, v)
    assert sep.kind == "piece"
    np.testing.assert_allclose(sep.v, [0, -1], atol=1e-12)
    assert sep.lam == pytest.approx(0.0)
    assert sep.strict_margin(flatzero) == pytest.approx(1.0)
    assert verify_separation_on_grid(sep, flatzero, 1000) >= -1e-9


def test_facet_separation():
    P1 = PerceptionFunction.indicator(Polyhedron.from_rows([([0, 1], 0.5)], 2))
    p = make_profile(("s0", "s1"), [Preference(AffineUtility.of([1, 0]), P1),
                                    Preference(AffineUtility.of([0, 1]), FLAT)],
                     Preference(AffineUtility.of([1, 1]), FLAT))
    d, v = _violation(p)
    sep = build_separation(p, d, v)
    assert sep.kind == "facet" and sep.scale == pytest.approx(2.0)
    np.testing.assert_allclose(sep.v, [0, -2], atol=1e-12)
    assert sep.lam == pytest.approx(-1.0)
    assert verify_separation_on_grid(sep, p, 200) >= -1e-9
    w = construct_witness(p, d, sep, diversity_witnesses(p))
    assert w.social_certificate.margin <= -1 + 1e-9


def test_flatzero_witness(flatzero):
    d, v = _violation(flatzero)
    w = forge(flatzero, d, v)
    u1 = flatzero.preference(1).utility
    assert u1(w.x.outcomes[0]) == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(u1(w.f.outcomes), [0, -2], atol=1e-12)
    np.testing.assert_allclose(w.margins, [0, 0, -1], atol=1e-9)
    assert w.social_value_at_prior == pytest.approx(-1.0)
    assert w.x.is_constant


def test_scaled_certificate_stays_valid(flatzero):
    d, v = _violation(flatzero)
    sep = build_separation(flatzero, d, v)
    for gamma in (0.5, 3.0, 40.0):
        s = sep.scaled(gamma)
        assert verify_separation_on_grid(s, flatzero, 200) >= -1e-9
        assert s.strict_margin(flatzero) > 0


def test_fabricated_violation_rejected(flatzero, example1):
    d, v = _violation(flatzero)
    fake = dataclasses.replace(v, prior=type(v.prior).of([1.0, 0.0]), agent=1)
    with pytest.raises(InvalidViolation):
        build_separation(flatzero, d, fake)


def test_tampered_certificate_fails_verification(flatzero):
    d, v = _violation(flatzero)
    sep = build_separation(flatzero, d, v)
    bad = dataclasses.replace(sep, lam=sep.lam + 10.0)
    with pytest.raises(VerificationFailed):
        construct_witness(flatzero, d, bad, diversity_witnesses(flatzero))


def test_every_random_violation_forges():
    for seed in range(25):
        p = random_profile(np.random.default_rng(seed), 3, 2)
        d = decompose_utility(p)
        for v in check_theorem1_condition(p, d).violations:
            w = forge(p, d, v)
            assert all(c.holds for c in w.agent_certificates)
            assert w.social_certificate.margin < -1e-6


def test_scaled_certificate_builds_same_witness(flatzero):
    d, v = _violation(flatzero)
    sep = build_separation(flatzero, d, v)
    dw = diversity_witnesses(flatzero)
    a = construct_witness(flatzero, d, sep, dw)
    b = construct_witness(flatzero, d, sep.scaled(7.0), dw)
    np.testing.assert_allclose(a.f.outcomes, b.f.outcomes, atol=1e-12)
