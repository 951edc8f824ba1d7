import cvxpy as cp
import numpy as np
import pytest

from csipla.numkernel import norms, soft_threshold, svd, svt


def test_svd_simple_cases():
    assert np.allclose(svd(np.eye(3)).sigma, [1, 1, 1])
    assert np.allclose(svd(np.diag([3.0, 1.0])).sigma, [3, 1])


def test_svd_contract(rng):
    m = rng.standard_normal((20, 8))
    r = svd(m)
    assert np.linalg.norm(m - r.reconstruct()) <= 1e-9 * np.linalg.norm(m)
    assert np.all(np.diff(r.sigma) <= 0)
    assert np.allclose(r.u.T @ r.u, np.eye(8), atol=1e-9)
    assert np.allclose(r.v.T @ r.v, np.eye(8), atol=1e-9)


def test_svd_rejects_nonfinite():
    with pytest.raises(ValueError):
        svd(np.array([[np.nan, 1.0]]))


def test_svt_cases(rng):
    m = rng.standard_normal((6, 4))
    assert np.allclose(svt(m, 0.0), m, atol=1e-12)
    assert np.array_equal(svt(m, svd(m).sigma[0]), np.zeros_like(m))
    assert np.allclose(svt(np.diag([3.0, 1.0]), 2.0), np.diag([1.0, 0.0]))
    with pytest.raises(ValueError):
        svt(m, -1.0)


def test_svt_is_nuclear_prox(rng):
    for _ in range(3):
        m = rng.standard_normal((5, 5))
        tau = rng.uniform(0.2, 1.5)
        x = cp.Variable((5, 5))
        cp.Problem(cp.Minimize(cp.normNuc(x) + cp.sum_squares(x - m) / (2 * tau))).solve(
            solver=cp.CLARABEL)
        assert np.max(np.abs(x.value - svt(m, tau))) < 1e-4


def test_svt_nonexpansive(rng):
    for _ in range(50):
        a, b = rng.standard_normal((2, 7, 4))
        tau = rng.uniform(0, 3)
        assert np.linalg.norm(svt(a, tau) - svt(b, tau)) <= np.linalg.norm(a - b) + 1e-12


def test_soft_threshold_definition():
    assert soft_threshold(0.5, 0.3) == pytest.approx(0.2)
    assert soft_threshold(-0.5, 0.3) == pytest.approx(-0.2)
    m = np.array([[0.1, -0.2], [0.3, 0.0]])
    assert np.array_equal(soft_threshold(m, 0.0), m)
    assert np.array_equal(soft_threshold(m, 0.3), np.zeros_like(m))


def test_soft_threshold_is_l1_prox(rng):
    grid = np.linspace(-5, 5, 200001)
    step = grid[1] - grid[0]
    for _ in range(20):
        lam, mu, c = rng.uniform(0.1, 2), rng.uniform(0.5, 3), rng.uniform(-4, 4)
        brute = grid[np.argmin(lam * np.abs(grid) + 0.5 * mu * (grid - c) ** 2)]
        assert abs(brute - soft_threshold(c, lam / mu)) <= step


def test_norms(rng):
    z = norms(np.zeros((3, 3)))
    assert all(v == 0 for v in z.values())
    n = norms(np.eye(4))
    assert n["nuclear"] == pytest.approx(4) and n["frobenius"] == pytest.approx(2)
    m = rng.standard_normal((10, 10))
    assert norms(m)["nuclear"] == pytest.approx(svd(m).sigma.sum(), abs=1e-9)
    assert norms(m)["l1"] == pytest.approx(np.abs(m).sum())
    assert norms(m)["linf"] == np.abs(m).max()
