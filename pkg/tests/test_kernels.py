import numpy as np
import pytest

from varbewley import _kernels
from varbewley.lp import _TOL_COST, _TOL_PIVOT


def _random_tableau(rng, m, n):
    # feasible, bounded standard-form tableau with slack basis
    A = rng.uniform(0.1, 1.0, size=(m, n))
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = rng.uniform(1, 2, size=m)
    T[m, :n] = rng.normal(size=n)
    return T, np.arange(n, n + m)


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba missing")
def test_simplex_backends_agree():
    rng = np.random.default_rng(0)
    for _ in range(30):
        T, basis = _random_tableau(rng, 4, 6)
        T1, b1 = T.copy(), basis.copy()
        T2, b2 = T.copy(), basis.copy()
        r1 = _kernels._simplex_iterate_numpy(T1, b1, T.shape[1] - 1, _TOL_COST, _TOL_PIVOT, 500)
        r2 = _kernels._simplex_iterate_numba(T2, b2, T.shape[1] - 1, _TOL_COST, _TOL_PIVOT, 500)
        assert tuple(r1) == tuple(r2)
        np.testing.assert_array_equal(b1, b2)
        np.testing.assert_allclose(T1, T2, atol=1e-12)


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba missing")
def test_grid_backends_agree():
    rng = np.random.default_rng(1)
    D = rng.normal(size=(300, 3))
    L = rng.dirichlet(np.ones(3), size=5000)
    c = rng.uniform(0, 2, size=5000)
    m1, a1 = _kernels._grid_min_numpy(D, L, c)
    m2, a2 = _kernels._grid_min_numba(D, L, c)
    np.testing.assert_allclose(m1, m2, atol=1e-12)
    np.testing.assert_array_equal(a1, a2)


def test_grid_min_brute_force():
    rng = np.random.default_rng(2)
    D = rng.normal(size=(20, 4))
    L = rng.dirichlet(np.ones(4), size=100)
    c = rng.uniform(0, 1, size=100)
    mins, arg = _kernels.grid_min(D, L, c)
    full = D @ L.T + c
    np.testing.assert_allclose(mins, full.min(axis=1))
    np.testing.assert_array_equal(arg, full.argmin(axis=1))


def test_env_flag_selects_numpy(monkeypatch):
    monkeypatch.setenv("VARBEWLEY_DISABLE_NUMBA", "1")
    assert not _kernels._numba_requested()
    monkeypatch.setenv("VARBEWLEY_DISABLE_NUMBA", "0")
    assert _kernels._numba_requested()
