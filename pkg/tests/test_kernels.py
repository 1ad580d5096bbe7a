"""Backend parity for the numba kernels against numpy fallbacks and dense oracles."""

import numpy as np
import pytest

from lagrom import kernels
from lagrom.errors import NumericalFailure, SingularTridiagonal


def random_tridiag(n, rng):
    lower = np.zeros(n)
    upper = np.zeros(n)
    lower[1:] = -rng.random(n - 1)
    upper[:-1] = -rng.random(n - 1)
    diag = 2.0 + rng.random(n) - lower - upper
    rhs = rng.standard_normal(n)
    return lower, diag, upper, rhs


def dense_from_bands(lower, diag, upper, corner_top=0.0, corner_bottom=0.0):
    n = diag.size
    a = np.diag(diag)
    for i in range(1, n):
        a[i, i - 1] = lower[i]
        a[i - 1, i] = upper[i - 1]
    a[0, -1] += corner_top
    a[-1, 0] += corner_bottom
    return a


@pytest.mark.parametrize("n", [1, 2, 3, 17, 400])
def test_thomas_matches_dense_solve(n):
    rng = np.random.default_rng(n)
    lower, diag, upper, rhs = random_tridiag(n, rng)
    x = kernels.thomas_solve(lower, diag, upper, rhs)
    oracle = np.linalg.solve(dense_from_bands(lower, diag, upper), rhs)
    assert np.allclose(x, oracle, atol=1e-12)


def test_thomas_backends_agree():
    rng = np.random.default_rng(7)
    lower, diag, upper, rhs = random_tridiag(64, rng)
    a = kernels.thomas_solve_numpy(lower, diag, upper, rhs)
    if kernels.NUMBA_ENABLED:
        b = kernels.thomas_solve_numba(lower, diag, upper, rhs)
        assert np.allclose(a, b, atol=1e-13)


def test_thomas_zero_pivot_raises():
    n = 4
    lower = np.zeros(n)
    diag = np.zeros(n)
    upper = np.zeros(n)
    with pytest.raises(SingularTridiagonal):
        kernels.thomas_solve(lower, diag, upper, np.ones(n))


@pytest.mark.parametrize("n", [2, 3, 5, 128])
def test_cyclic_thomas_matches_dense(n):
    rng = np.random.default_rng(n + 100)
    lower, diag, upper, rhs = random_tridiag(n, rng)
    ct, cb = -0.3, -0.4
    x = kernels.cyclic_thomas_solve(lower, diag, upper, ct, cb, rhs)
    oracle = np.linalg.solve(dense_from_bands(lower, diag, upper, ct, cb), rhs)
    assert np.allclose(x, oracle, atol=1e-11)


def test_interp_clamped_matches_numpy():
    rng = np.random.default_rng(3)
    src = np.sort(rng.random(40)) * 5.0
    vals = np.cos(src)
    dst = rng.random(200) * 7.0 - 1.0  # includes out-of-hull points
    a = kernels.interp_clamped_numpy(src, vals, dst)
    b = kernels.interp_clamped(src, vals, dst)
    assert np.allclose(a, b, atol=1e-14)


def test_interp_periodic_matches_numpy_period_mode():
    rng = np.random.default_rng(4)
    period = 2.0 * np.pi
    src = np.sort(rng.random(50)) * (period * 0.97)
    vals = np.sin(src)
    dst = rng.random(300) * 3 * period - period
    reference = np.interp(dst, src, vals, period=period)
    fast = kernels.interp_periodic(src, vals, dst, period)
    assert np.allclose(reference, fast, atol=1e-12)


def test_diffusion_bands_backends_agree():
    rng = np.random.default_rng(5)
    d_nodes = 0.01 + rng.random(33)
    for periodic in (True, False):
        ref = kernels.diffusion_bands_numpy(d_nodes, 0.7, periodic)
        out = kernels.diffusion_bands(d_nodes, 0.7, periodic)
        for a, b in zip(ref, out):
            assert np.allclose(a, b, atol=1e-14)


def test_solve_small_matches_lapack():
    rng = np.random.default_rng(6)
    for n in (1, 2, 5, 12):
        a = np.eye(n) + 0.3 * rng.standard_normal((n, n))
        b = rng.standard_normal(n)
        assert np.allclose(kernels.solve_small(a, b), np.linalg.solve(a, b), atol=1e-10)


def test_solve_small_singular_raises():
    with pytest.raises(NumericalFailure):
        kernels.solve_small(np.zeros((3, 3)), np.ones(3))


@pytest.mark.parametrize("periodic", [True, False])
def test_levelset_step_backends_agree(periodic):
    rng = np.random.default_rng(8)
    values = rng.standard_normal((12, 30))
    speeds = np.linspace(-1.5, 2.0, 12)
    a = kernels.levelset_step_numpy(values, speeds, 0.3, periodic)
    b = kernels.levelset_step(values, speeds, 0.3, periodic)
    assert np.allclose(a, b, atol=1e-14)


def test_levelset_unit_courant_is_exact_shift():
    rng = np.random.default_rng(9)
    row = rng.standard_normal(25)
    values = row[None, :]
    shifted = kernels.levelset_step(values, np.array([1.0]), 1.0, True)
    assert np.allclose(shifted[0], np.roll(row, 1), atol=1e-14)
    shifted_left = kernels.levelset_step(values, np.array([-1.0]), 1.0, True)
    assert np.allclose(shifted_left[0], np.roll(row, -1), atol=1e-14)


def test_warmup_idempotent():
    kernels.warmup()
    kernels.warmup()
