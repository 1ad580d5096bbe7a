"""Galerkin-projection reduced models on orthonormal snapshot bases.

The fixed-grid stepper projects the full advection-diffusion residual; the
moving-frame stepper projects the coupled position/value residuals, with the
diffusion contribution evaluated through the same interpolate-to-reference,
diffuse, interpolate-back pipeline as the semi-Lagrangian solver. Both solve
the projected system with Newton iteration in the reduced coordinates.

No hyper-reduction is applied: every Newton iteration evaluates the residual
at full dimension, so rollout cost scales with the grid like the solvers do.
A prepared ``PodStepContext`` caches per-run constants (grid nodes, basis
splits) so the per-step overhead stays proportional to actual work.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np

from . import kernels
from .core import ProblemSpec, SnapshotMatrix, interp_unchecked
from .errors import GridEntanglement, NewtonDivergence, NumericalFailure
from .hfm_eulerian import diffusion_system_for, face_fluxes
from .svd_core import reduced_svd, truncate, truncation_rank

NEWTON_TOL = 1e-10
NEWTON_CAP = 50
FD_STEP = 1e-7

FRAME_EULERIAN = "eulerian"
FRAME_LAGRANGIAN = "lagrangian"


@dataclass(frozen=True)
class PodBasis:
    """Orthonormal basis columns spanning the snapshot data."""

    basis: np.ndarray
    rank: int
    frame: str

    def project(self, full: np.ndarray) -> np.ndarray:
        return self.basis.T @ full

    def reconstruct(self, reduced: np.ndarray) -> np.ndarray:
        return self.basis @ reduced


def fit_pod(snapshots, epsilon: float = None, fixed_rank: int = None, frame: str = FRAME_EULERIAN) -> PodBasis:
    """Truncated left singular vectors of the snapshot matrix."""
    if (epsilon is None) == (fixed_rank is None):
        raise ValueError("provide exactly one of epsilon or fixed_rank")
    svd = reduced_svd(snapshots)
    if epsilon is not None:
        r = truncation_rank(svd.singular_values, epsilon)
    else:
        r = min(int(fixed_rank), svd.rank)
    svd_r = truncate(svd, r)
    return PodBasis(svd_r.left_vectors.copy(), r, frame)


class StepResult(NamedTuple):
    reduced: np.ndarray
    iterations: int


@dataclass
class PodStepContext:
    """Per-run constants shared by every step of one rollout."""

    basis_matrix: np.ndarray
    basis_t: np.ndarray
    pos_block: Optional[np.ndarray]
    val_block: Optional[np.ndarray]
    pos_block_t: Optional[np.ndarray]
    val_block_t: Optional[np.ndarray]
    euler_nodes: np.ndarray
    periodic: bool
    period: float
    identity_r: np.ndarray

    @classmethod
    def for_basis(cls, basis: PodBasis, spec: ProblemSpec) -> "PodStepContext":
        phi = basis.basis
        nodes = np.array(spec.grid().nodes)
        pos = val = pos_t = val_t = None
        if basis.frame == FRAME_LAGRANGIAN:
            n = phi.shape[0] // 2
            pos, val = phi[:n], phi[n:]
            pos_t = np.ascontiguousarray(pos.T)
            val_t = np.ascontiguousarray(val.T)
        return cls(
            basis_matrix=phi,
            basis_t=np.ascontiguousarray(phi.T),
            pos_block=pos,
            val_block=val,
            pos_block_t=pos_t,
            val_block_t=val_t,
            euler_nodes=nodes,
            periodic=spec.periodic,
            period=spec.domain_length,
            identity_r=np.eye(basis.rank),
        )


def _speed_vector(spec: ProblemSpec, u: np.ndarray) -> np.ndarray:
    f = np.asarray(spec.flux_f(u), dtype=float)
    if f.ndim == 0:
        return np.full(u.shape, float(f))
    return f


def _newton_guard(vec: np.ndarray, iteration: int) -> None:
    if not np.isfinite(vec).all():
        raise NewtonDivergence(f"non-finite iterate at Newton iteration {iteration}", iterations=iteration)


def pod_step_eulerian(
    basis: PodBasis,
    u_hat: np.ndarray,
    spec: ProblemSpec,
    time_index: int,
    context: PodStepContext = None,
) -> StepResult:
    """Advance reduced coordinates by projecting the fixed-grid step residual.

    The advective flux is explicit in the previous state, so the projected
    residual is affine in the unknown and Newton lands in one iteration; the
    loop form covers state-dependent diffusion coefficients.
    """
    if basis.frame != FRAME_EULERIAN:
        raise ValueError("basis frame must be eulerian")
    if context is None:
        context = PodStepContext.for_basis(basis, spec)
    phi = context.basis_matrix
    u_prev = phi @ u_hat
    t_next = (time_index + 1) * spec.dt

    fluxes = face_fluxes(u_prev, spec)
    adv = (spec.dt / spec.dx) * (fluxes[1:] - fluxes[:-1])
    u_star = u_prev - adv

    if spec.diffusion_D is None:
        a_phi = phi
        rhs_known = u_star
    else:
        system = diffusion_system_for(spec, context.euler_nodes, t_next, u_star)
        a_phi = _apply_identity_minus_diffusion(system, phi)
        rhs_known = u_star
        if not spec.periodic:
            rhs_known = u_star.copy()
            rhs_known[0] += system.mu * system.d_faces[0] * spec.bc_values[0]
            rhs_known[-1] += system.mu * system.d_faces[-1] * spec.bc_values[1]

    jac = context.basis_t @ a_phi
    target = context.basis_t @ rhs_known
    u_next_hat = u_hat.copy()
    for iteration in range(1, NEWTON_CAP + 1):
        resid = jac @ u_next_hat - target
        _newton_guard(resid, iteration)
        if math.sqrt(float(resid @ resid)) <= NEWTON_TOL:
            return StepResult(u_next_hat, iteration - 1)
        u_next_hat = u_next_hat - kernels.solve_small(jac, resid)
        _newton_guard(u_next_hat, iteration)
    raise NewtonDivergence(f"no convergence in {NEWTON_CAP} iterations", iterations=NEWTON_CAP)


def _apply_identity_minus_diffusion(system, columns: np.ndarray) -> np.ndarray:
    """(I - dt D2) applied column-wise, corners included for periodic closure."""
    mu = system.mu
    df = system.d_faces
    out = columns * (1.0 + mu * (df[:-1, None] + df[1:, None]))
    out[1:, :] -= mu * df[1:-1, None] * columns[:-1, :]
    out[:-1, :] -= mu * df[1:-1, None] * columns[1:, :]
    if system.periodic:
        out[0, :] -= mu * df[0] * columns[-1, :]
        out[-1, :] -= mu * df[-1] * columns[0, :]
    return out


def pod_step_lagrangian(
    basis: PodBasis,
    z_hat: np.ndarray,
    spec: ProblemSpec,
    time_index: int,
    context: PodStepContext = None,
    z_prev_full: np.ndarray = None,
) -> StepResult:
    """Advance stacked [positions; values] reduced coordinates one step.

    ``z_prev_full`` may carry the already reconstructed previous state to
    avoid a redundant basis multiplication inside rollout loops.
    """
    if basis.frame != FRAME_LAGRANGIAN:
        raise ValueError("basis frame must be lagrangian")
    if context is None:
        context = PodStepContext.for_basis(basis, spec)
    phi = context.basis_matrix
    n = context.pos_block.shape[0]
    z_prev = phi @ z_hat if z_prev_full is None else z_prev_full
    x_prev, u_prev = z_prev[:n], z_prev[n:]
    if np.any(np.diff(x_prev) <= 0.0):
        raise GridEntanglement(
            f"reconstructed positions tangled entering step {time_index + 1}",
            time_index=time_index,
        )
    t_next = (time_index + 1) * spec.dt
    dt_half = 0.5 * spec.dt

    if spec.diffusion_D is None:
        u_target = u_prev
    else:
        nodes = context.euler_nodes
        u_tilde = interp_unchecked(x_prev, u_prev, nodes, context.periodic, context.period)
        system = diffusion_system_for(spec, nodes, t_next, u_tilde)
        u_tilde_new = system.solve(u_tilde)
        u_target = interp_unchecked(nodes, u_tilde_new, x_prev, context.periodic, context.period)

    base_x = x_prev + dt_half * _speed_vector(spec, u_prev)

    z_next_hat = z_hat.copy()
    for iteration in range(1, NEWTON_CAP + 1):
        z_next = phi @ z_next_hat
        x_next, u_next = z_next[:n], z_next[n:]
        f_next = _speed_vector(spec, u_next)
        r_x = x_next - base_x - dt_half * f_next
        r_u = u_next - u_target
        proj_resid = context.pos_block_t @ r_x + context.val_block_t @ r_u
        _newton_guard(proj_resid, iteration)
        if math.sqrt(float(proj_resid @ proj_resid)) <= NEWTON_TOL:
            return StepResult(z_next_hat, iteration - 1)
        # d(flux speed)/du by scaled forward differences; everything else in
        # the Jacobian is the identity thanks to the orthonormal basis.
        h = FD_STEP * np.maximum(1.0, np.abs(u_next))
        f_prime = (_speed_vector(spec, u_next + h) - f_next) / h
        jac = context.identity_r - dt_half * (context.pos_block_t @ (f_prime[:, None] * context.val_block))
        try:
            delta = kernels.solve_small(jac, proj_resid)
        except NumericalFailure as exc:
            raise NewtonDivergence(f"singular reduced Jacobian: {exc}", iterations=iteration) from exc
        z_next_hat = z_next_hat - delta
        _newton_guard(z_next_hat, iteration)
    raise NewtonDivergence(f"no convergence in {NEWTON_CAP} iterations", iterations=NEWTON_CAP)


@dataclass
class PodRomRun:
    """Reduced-space rollout with full-dimensional reconstructions."""

    snapshots: SnapshotMatrix
    reduced_trajectory: np.ndarray
    newton_iterations: List[int]
    initial_projection_error: float
    wall_seconds: float


def run_pod_rom(basis: PodBasis, initial_full: np.ndarray, spec: ProblemSpec, horizon: int) -> PodRomRun:
    """Project the initial state, step to the horizon, reconstruct each state."""
    kernels.warmup()
    started = time.perf_counter()
    context = PodStepContext.for_basis(basis, spec)
    z0 = np.asarray(initial_full, dtype=float)
    z_hat = basis.project(z0)
    recon = context.basis_matrix @ z_hat
    proj_err = float(np.linalg.norm(z0 - recon))
    reduced = np.empty((basis.rank, horizon + 1))
    reduced[:, 0] = z_hat
    full = np.empty((basis.basis.shape[0], horizon))
    iters: List[int] = []
    lagrangian = basis.frame == FRAME_LAGRANGIAN
    for k in range(horizon):
        if lagrangian:
            z_hat, used = pod_step_lagrangian(basis, z_hat, spec, k, context, z_prev_full=recon)
        else:
            z_hat, used = pod_step_eulerian(basis, z_hat, spec, k, context)
        iters.append(used)
        reduced[:, k + 1] = z_hat
        recon = context.basis_matrix @ z_hat
        full[:, k] = recon
    snaps = SnapshotMatrix(full, np.arange(1, horizon + 1)) if horizon else SnapshotMatrix(
        np.empty((basis.basis.shape[0], 0)), np.empty(0, dtype=int)
    )
    elapsed = time.perf_counter() - started
    return PodRomRun(snaps, reduced, iters, proj_err, elapsed)
