"""Hot numerical kernels with numba-compiled and pure-numpy implementations.

The time steppers spend most of their cycles in a handful of loop-shaped
routines: the tridiagonal (Thomas) elimination behind the implicit diffusion
solves, piecewise-linear interpolation searches, the diffusion band assembly,
the row-wise upwind sweep of the level-set field, and the small dense Newton
solves. Each is provided twice:

* a loop formulation compiled with ``numba.njit`` (default when numba imports),
* a numpy/scipy fallback with identical semantics.

Set ``LAGROM_DISABLE_NUMBA=1`` in the environment to force the fallback path;
``lagrom.kernel_bench`` times the two against each other.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.linalg import solve_banded

from .errors import NumericalFailure, SingularTridiagonal

NUMBA_DISABLED = os.environ.get("LAGROM_DISABLE_NUMBA", "").strip().lower() in {
    "1",
    "true",
    "yes",
    "on",
}

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled via LAGROM_DISABLE_NUMBA")
    from numba import njit

    NUMBA_ENABLED = True
except ImportError:
    njit = None
    NUMBA_ENABLED = False

# Pivots below this magnitude are treated as exact zeros. The diffusion
# systems are diagonally dominant with unit diagonal scale, so legitimate
# pivots sit at O(1).
_PIVOT_TINY = 1e-300


def _thomas_loops(lower, diag, upper, rhs):
    """Forward/backward elimination. Returns (x, ok_flag).

    ``lower[i]`` multiplies x[i-1] in row i (lower[0] unused);
    ``upper[i]`` multiplies x[i+1] in row i (upper[-1] unused).
    """
    n = diag.shape[0]
    cp = np.empty(n)
    dp = np.empty(n)
    x = np.empty(n)
    den = diag[0]
    if abs(den) < _PIVOT_TINY:
        return x, False
    cp[0] = upper[0] / den
    dp[0] = rhs[0] / den
    for i in range(1, n):
        den = diag[i] - lower[i] * cp[i - 1]
        if abs(den) < _PIVOT_TINY:
            return x, False
        cp[i] = upper[i] / den
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / den
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x, True


def _interp_clamped_loops(src, vals, dst, out):
    """Piecewise-linear interpolation by per-point binary search.

    Destination points outside the source hull take the edge samples,
    matching numpy's default end handling.
    """
    n = src.shape[0]
    for i in range(dst.shape[0]):
        x = dst[i]
        if x <= src[0]:
            out[i] = vals[0]
            continue
        if x >= src[n - 1]:
            out[i] = vals[n - 1]
            continue
        lo = 0
        hi = n - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if src[mid] <= x:
                lo = mid
            else:
                hi = mid
        w = (x - src[lo]) / (src[lo + 1] - src[lo])
        out[i] = vals[lo] + w * (vals[lo + 1] - vals[lo])
    return out


def _interp_periodic_loops(src, vals, dst, period, out):
    """Periodic variant: wrap destinations into the source window and bridge
    the seam segment from the last source node to the first plus one period.
    """
    n = src.shape[0]
    x0 = src[0]
    seam = src[n - 1] - x0
    for i in range(dst.shape[0]):
        x = (dst[i] - x0) % period
        if x >= seam:
            w = (x - seam) / (period - seam)
            out[i] = vals[n - 1] + w * (vals[0] - vals[n - 1])
            continue
        lo = 0
        hi = n - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if src[mid] - x0 <= x:
                lo = mid
            else:
                hi = mid
        w = (x - (src[lo] - x0)) / (src[lo + 1] - src[lo])
        out[i] = vals[lo] + w * (vals[lo + 1] - vals[lo])
    return out


def _diffusion_bands_loops(d_nodes, mu, periodic, d_faces, lower, diag, upper):
    """Face-averaged coefficients and the (I - dt*D2) bands in one pass."""
    n = d_nodes.shape[0]
    if periodic:
        d_faces[0] = 0.5 * (d_nodes[n - 1] + d_nodes[0])
        d_faces[n] = d_faces[0]
    else:
        d_faces[0] = d_nodes[0]
        d_faces[n] = d_nodes[n - 1]
    for j in range(1, n):
        d_faces[j] = 0.5 * (d_nodes[j - 1] + d_nodes[j])
    lower[0] = 0.0
    upper[n - 1] = 0.0
    for j in range(n):
        diag[j] = 1.0 + mu * (d_faces[j] + d_faces[j + 1])
        if j > 0:
            lower[j] = -mu * d_faces[j]
        if j < n - 1:
            upper[j] = -mu * d_faces[j + 1]
    return d_faces


def _solve_small_loops(a, b, out):
    """Gaussian elimination with partial pivoting for small dense systems."""
    n = a.shape[0]
    m = a.copy()
    rhs = b.copy()
    for col in range(n):
        piv = col
        best = abs(m[col, col])
        for row in range(col + 1, n):
            if abs(m[row, col]) > best:
                best = abs(m[row, col])
                piv = row
        if best < _PIVOT_TINY:
            return out, False
        if piv != col:
            for k in range(col, n):
                tmp = m[col, k]
                m[col, k] = m[piv, k]
                m[piv, k] = tmp
            tmp = rhs[col]
            rhs[col] = rhs[piv]
            rhs[piv] = tmp
        for row in range(col + 1, n):
            factor = m[row, col] / m[col, col]
            if factor != 0.0:
                for k in range(col + 1, n):
                    m[row, k] -= factor * m[col, k]
                rhs[row] -= factor * rhs[col]
    for row in range(n - 1, -1, -1):
        acc = rhs[row]
        for k in range(row + 1, n):
            acc -= m[row, k] * out[k]
        out[row] = acc / m[row, row]
    return out, True


def _levelset_loops(values, speeds, dt_over_dx, periodic, out):
    """Sign-aware first-order upwind, one row per transport speed."""
    ny, nx = values.shape
    for i in range(ny):
        nu = speeds[i] * dt_over_dx
        if speeds[i] >= 0.0:
            if periodic:
                left = values[i, nx - 1]
            else:
                left = values[i, 0]
            prev = values[i, 0]
            out[i, 0] = values[i, 0] - nu * (values[i, 0] - left)
            for j in range(1, nx):
                cur = values[i, j]
                out[i, j] = cur - nu * (cur - prev)
                prev = cur
        else:
            if periodic:
                right = values[i, 0]
            else:
                right = values[i, nx - 1]
            nxt = values[i, nx - 1]
            out[i, nx - 1] = values[i, nx - 1] - nu * (right - values[i, nx - 1])
            for j in range(nx - 2, -1, -1):
                cur = values[i, j]
                out[i, j] = cur - nu * (nxt - cur)
                nxt = cur
    return out


if NUMBA_ENABLED:
    _thomas_numba = njit(cache=True)(_thomas_loops)
    _levelset_numba = njit(cache=True)(_levelset_loops)
    _interp_clamped_numba = njit(cache=True)(_interp_clamped_loops)
    _interp_periodic_numba = njit(cache=True)(_interp_periodic_loops)
    _diffusion_bands_numba = njit(cache=True)(_diffusion_bands_loops)
    _solve_small_numba = njit(cache=True)(_solve_small_loops)
else:
    _thomas_numba = None
    _levelset_numba = None
    _interp_clamped_numba = None
    _interp_periodic_numba = None
    _diffusion_bands_numba = None
    _solve_small_numba = None


def thomas_solve_numpy(lower, diag, upper, rhs):
    """LAPACK-banded fallback for the tridiagonal solve."""
    n = diag.shape[0]
    if n == 1:
        if abs(diag[0]) < _PIVOT_TINY:
            raise SingularTridiagonal("zero pivot in 1x1 system")
        return rhs / diag
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    try:
        return solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - defensive
        raise SingularTridiagonal(str(exc)) from exc


def thomas_solve_numba(lower, diag, upper, rhs):
    """numba-compiled Thomas sweep; raises on zero pivots."""
    x, ok = _thomas_numba(lower, diag, upper, rhs)
    if not ok:
        raise SingularTridiagonal("zero pivot during elimination")
    return x


def interp_clamped_numpy(src, vals, dst):
    return np.interp(dst, src, vals)


def interp_clamped_numba(src, vals, dst):
    out = np.empty(dst.shape[0])
    return _interp_clamped_numba(src, vals, dst, out)


def interp_periodic_numpy(src, vals, dst, period):
    shifted = src[0] + np.mod(dst - src[0], period)
    src_ext = np.concatenate([src, src[:1] + period])
    vals_ext = np.concatenate([vals, vals[:1]])
    return np.interp(shifted, src_ext, vals_ext)


def interp_periodic_numba(src, vals, dst, period):
    out = np.empty(dst.shape[0])
    return _interp_periodic_numba(src, vals, dst, period, out)


def diffusion_bands_numpy(d_nodes, mu, periodic):
    n = d_nodes.shape[0]
    if periodic:
        d_ext = np.concatenate([d_nodes[-1:], d_nodes, d_nodes[:1]])
    else:
        d_ext = np.concatenate([d_nodes[:1], d_nodes, d_nodes[-1:]])
    d_faces = 0.5 * (d_ext[:-1] + d_ext[1:])
    lower = np.empty(n)
    upper = np.empty(n)
    diag = 1.0 + mu * (d_faces[:-1] + d_faces[1:])
    lower[0] = 0.0
    upper[-1] = 0.0
    lower[1:] = -mu * d_faces[1:-1]
    upper[:-1] = -mu * d_faces[1:-1]
    return d_faces, lower, diag, upper


def diffusion_bands_numba(d_nodes, mu, periodic):
    n = d_nodes.shape[0]
    d_faces = np.empty(n + 1)
    lower = np.empty(n)
    diag = np.empty(n)
    upper = np.empty(n)
    _diffusion_bands_numba(d_nodes, mu, periodic, d_faces, lower, diag, upper)
    return d_faces, lower, diag, upper


def solve_small_numpy(a, b):
    try:
        return np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc


def solve_small_numba(a, b):
    out = np.empty(b.shape[0])
    out, ok = _solve_small_numba(a, b, out)
    if not ok:
        raise NumericalFailure("singular small system")
    return out


def levelset_step_numpy(values, speeds, dt_over_dx, periodic):
    """Vectorized whole-array variant of the upwind sweep."""
    left = np.roll(values, 1, axis=1)
    right = np.roll(values, -1, axis=1)
    if not periodic:
        left[:, 0] = values[:, 0]
        right[:, -1] = values[:, -1]
    nu = (speeds * dt_over_dx)[:, None]
    fwd = values - nu * (values - left)
    bwd = values - nu * (right - values)
    return np.where(speeds[:, None] >= 0.0, fwd, bwd)


def levelset_step_numba(values, speeds, dt_over_dx, periodic):
    out = np.empty_like(values)
    return _levelset_numba(values, speeds, dt_over_dx, periodic, out)


if NUMBA_ENABLED:
    thomas_solve = thomas_solve_numba
    levelset_step = levelset_step_numba
    interp_clamped = interp_clamped_numba
    interp_periodic = interp_periodic_numba
    diffusion_bands = diffusion_bands_numba
    solve_small = solve_small_numba
else:
    thomas_solve = thomas_solve_numpy
    levelset_step = levelset_step_numpy
    interp_clamped = interp_clamped_numpy
    interp_periodic = interp_periodic_numpy
    diffusion_bands = diffusion_bands_numpy
    solve_small = solve_small_numpy


def cyclic_thomas_solve(lower, diag, upper, corner_top, corner_bottom, rhs):
    """Solve a tridiagonal system with periodic corner couplings.

    ``corner_top`` is the (0, n-1) matrix entry, ``corner_bottom`` the
    (n-1, 0) entry. Uses the Sherman-Morrison rank-one update on top of two
    plain Thomas solves, which keeps both backends usable.
    """
    n = diag.shape[0]
    if n < 3:
        a = np.zeros((n, n))
        a[np.arange(n), np.arange(n)] = diag
        if n == 2:
            a[0, 1] = upper[0] + corner_top
            a[1, 0] = lower[1] + corner_bottom
        try:
            return np.linalg.solve(a, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularTridiagonal(str(exc)) from exc
    gamma = -diag[0]
    diag2 = diag.copy()
    diag2[0] = diag[0] - gamma
    diag2[-1] = diag[-1] - corner_top * corner_bottom / gamma
    y = thomas_solve(lower, diag2, upper, rhs)
    u = np.zeros(n)
    u[0] = gamma
    u[-1] = corner_bottom
    z = thomas_solve(lower, diag2, upper, u)
    denom = 1.0 + z[0] + corner_top * z[-1] / gamma
    if abs(denom) < _PIVOT_TINY:
        raise SingularTridiagonal("singular rank-one correction")
    factor = (y[0] + corner_top * y[-1] / gamma) / denom
    return y - factor * z


_warmed = False


def warmup():
    """Trigger JIT compilation outside of any timed region."""
    global _warmed
    if _warmed:
        return
    lower = np.array([0.0, -0.1, -0.1])
    diag = np.array([1.2, 1.2, 1.2])
    upper = np.array([-0.1, -0.1, 0.0])
    rhs = np.array([1.0, 2.0, 3.0])
    thomas_solve(lower, diag, upper, rhs)
    cyclic_thomas_solve(lower, diag, upper, -0.1, -0.1, rhs)
    field = np.arange(12.0).reshape(3, 4)
    speeds = np.array([-1.0, 0.0, 1.0])
    levelset_step(field, speeds, 0.5, True)
    levelset_step(field, speeds, 0.5, False)
    src = np.array([0.0, 1.0, 2.0])
    vals = np.array([0.0, 1.0, 0.0])
    dst = np.array([0.5, 1.5, 2.5])
    interp_clamped(src, vals, dst)
    interp_periodic(src, vals, dst, 3.0)
    diffusion_bands(np.array([0.1, 0.2, 0.3]), 0.5, True)
    diffusion_bands(np.array([0.1, 0.2, 0.3]), 0.5, False)
    solve_small(np.array([[2.0, 1.0], [1.0, 3.0]]), np.array([1.0, 2.0]))
    _warmed = True
