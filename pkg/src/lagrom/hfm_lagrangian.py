"""Semi-Lagrangian high-fidelity solver.

Grid points ride the characteristics and carry the solution values. Each step
performs, in order:

  (i)   interpolate the carried values from the moving grid onto the fixed
        uniform reference grid,
  (ii)  implicit diffusion solve on that fixed grid,
  (iii) interpolate the diffused values back onto the moving grid,
  (iv)  advance the grid positions with the trapezoidal rule
        x^{n+1} = x^n + dt/2 (f(u^n) + f(u^{n+1})).

When the diffusion coefficient is ``None`` the first three sub-steps are
skipped and the carried values are transported bit-exactly. Positions are
kept unwrapped (monotone) for periodic problems; wrapping happens only inside
the interpolation, so entanglement detection stays a plain monotonicity test.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import Grid1D, ProblemSpec, SnapshotMatrix, interp_unchecked
from .errors import DimensionMismatch, GridEntanglement, NumericalFailure
from .hfm_eulerian import RESIDUAL_TOL, diffusion_system_for, second_difference


@dataclass(frozen=True)
class LagrangianState:
    """Moving-grid positions and carried values at one time level."""

    positions: Grid1D
    values: np.ndarray
    eulerian_grid: Grid1D
    time_index: int = 0

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if values.shape != (len(self.positions),):
            raise DimensionMismatch("positions and values must have equal length")

    @property
    def n(self) -> int:
        return len(self.positions)

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.positions.nodes, self.values])


def initial_lagrangian_state(spec: ProblemSpec) -> LagrangianState:
    grid = spec.grid()
    u0 = np.asarray(spec.initial_u0(grid.nodes), dtype=float)
    return LagrangianState(grid, u0, grid, 0)


def advance_lagrangian(state: LagrangianState, spec: ProblemSpec) -> LagrangianState:
    """One semi-Lagrangian step; raises GridEntanglement when characteristics cross."""
    x = state.positions.nodes
    u = state.values
    t_next = (state.time_index + 1) * spec.dt

    if spec.diffusion_D is None:
        u_new = u
    else:
        periodic = spec.periodic
        period = spec.domain_length
        x_euler = state.eulerian_grid.nodes
        u_tilde = interp_unchecked(x, u, x_euler, periodic, period)
        system = diffusion_system_for(spec, x_euler, t_next, u_tilde)
        u_tilde_new = system.solve(u_tilde)
        residual = u_tilde_new - u_tilde - second_difference(system, u_tilde_new)
        if np.max(np.abs(residual)) > RESIDUAL_TOL:
            raise NumericalFailure(
                f"diffusion residual {np.max(np.abs(residual)):.3e} exceeds {RESIDUAL_TOL:.0e}"
            )
        u_new = interp_unchecked(x_euler, u_tilde_new, x, periodic, period)

    f_old = np.broadcast_to(np.asarray(spec.flux_f(u), dtype=float), u.shape)
    f_new = np.broadcast_to(np.asarray(spec.flux_f(u_new), dtype=float), u.shape)
    x_new = x + 0.5 * spec.dt * (f_old + f_new)

    if np.any(np.diff(x_new) <= 0.0):
        raise GridEntanglement(
            f"moving grid tangled at time index {state.time_index + 1}",
            time_index=state.time_index + 1,
        )
    if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(u_new))):
        raise NumericalFailure(f"non-finite state at time index {state.time_index + 1}")
    return LagrangianState(Grid1D(x_new), u_new, state.eulerian_grid, state.time_index + 1)


@dataclass
class LagrangianRun:
    """Stacked snapshots plus retained position/value trajectories."""

    snapshots: SnapshotMatrix
    positions: np.ndarray
    values: np.ndarray
    eulerian_grid: Grid1D
    wall_seconds: float


def run_lagrangian_hfm(spec: ProblemSpec, n_store: int) -> LagrangianRun:
    """Integrate from the uniform grid; snapshots are the 2N stacks [x^k; u^k]."""
    if n_store > spec.n_steps:
        raise ValueError("n_store cannot exceed the number of steps")
    kernels.warmup()
    started = time.perf_counter()
    state = initial_lagrangian_state(spec)
    n = state.n
    positions = np.empty((n, spec.n_steps + 1))
    values = np.empty((n, spec.n_steps + 1))
    positions[:, 0] = state.positions.nodes
    values[:, 0] = state.values
    for step in range(spec.n_steps):
        state = advance_lagrangian(state, spec)
        positions[:, step + 1] = state.positions.nodes
        values[:, step + 1] = state.values
    stacked = np.vstack([positions[:, 1 : n_store + 1], values[:, 1 : n_store + 1]])
    snaps = SnapshotMatrix(stacked, np.arange(1, n_store + 1))
    elapsed = time.perf_counter() - started
    return LagrangianRun(snaps, positions, values, state.eulerian_grid, elapsed)
