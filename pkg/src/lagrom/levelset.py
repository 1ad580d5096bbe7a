"""Level-set embedding of a 1-D conservation law into 2-D linear transport.

A state u(x, t) solving u_t + f(u) u_x = 0 is represented implicitly by a
field c(x, y, t) initialized to c0 = y - u0(x): each horizontal row advects
independently at the constant speed f(y_row), and the zero contour of c in
the (x, y) plane recovers u. The 2-D field is linear dynamics, so a DMD fit
on flattened field snapshots gives an iteration-free surrogate whose contours
approximate the nonlinear solution.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import Grid1D, ProblemSpec, SnapshotMatrix, StateVector
from .errors import (
    CflViolation,
    MultipleSignChanges,
    NoSignChange,
    RangeNotCovered,
)
from .dmd_rom import OBSERVABLE_LEVELSET, DmdModel, fit_dmd, predict
from .hfm_eulerian import CFL_SLACK

DEFAULT_MARGIN_FRAC = 0.1


@dataclass(frozen=True)
class LevelSetField:
    """2-D sample of c on the tensor grid (rows follow y, columns follow x)."""

    x_grid: Grid1D
    y_grid: Grid1D
    values: np.ndarray
    time_index: int = 0

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if vals.shape != (len(self.y_grid), len(self.x_grid)):
            raise RangeNotCovered(
                f"field shape {vals.shape} does not match (n_y, n_x) = "
                f"({len(self.y_grid)}, {len(self.x_grid)})"
            )

    def flattened(self) -> np.ndarray:
        # Column-major: x-block per column stacked, fixed layout for DMD.
        return self.values.ravel(order="F")


def unflatten_field(vec: np.ndarray, x_grid: Grid1D, y_grid: Grid1D, time_index: int = 0) -> LevelSetField:
    values = np.asarray(vec, dtype=float).reshape((len(y_grid), len(x_grid)), order="F")
    return LevelSetField(x_grid, y_grid, values, time_index)


def value_grid_for(u0_samples: np.ndarray, n_y: int, margin_frac: float = DEFAULT_MARGIN_FRAC) -> Grid1D:
    """y nodes spanning the sampled data range plus a safety margin."""
    lo, hi = float(np.min(u0_samples)), float(np.max(u0_samples))
    margin = margin_frac * max(hi - lo, 1e-12)
    if hi == lo:
        margin = max(margin, 0.1 * max(abs(hi), 1.0))
    return Grid1D(np.linspace(lo - margin, hi + margin, n_y), uniform=True)


def embed_initial(u0, x_grid: Grid1D, y_grid: Grid1D) -> LevelSetField:
    """Build c0(x, y) = y - u0(x); the zero contour is exactly the initial curve."""
    u_samples = np.asarray(u0(x_grid.nodes), dtype=float)
    lo, hi = float(np.min(u_samples)), float(np.max(u_samples))
    required = DEFAULT_MARGIN_FRAC * (hi - lo)
    tol = 1e-12 * max(abs(hi), abs(lo), 1.0)
    if y_grid.nodes[0] > lo - required + tol or y_grid.nodes[-1] < hi + required - tol:
        raise RangeNotCovered(
            f"y range [{y_grid.nodes[0]:.4g}, {y_grid.nodes[-1]:.4g}] does not cover "
            f"[{lo - required:.4g}, {hi + required:.4g}]"
        )
    values = y_grid.nodes[:, None] - u_samples[None, :]
    return LevelSetField(x_grid, y_grid, values, 0)


def advance_levelset(field: LevelSetField, spec: ProblemSpec, dt: float) -> LevelSetField:
    """Advance every row by sign-aware upwind at its own constant speed f(y)."""
    dx = field.x_grid.spacing
    speeds = np.asarray(spec.flux_f(field.y_grid.nodes), dtype=float)
    speeds = np.broadcast_to(speeds, field.y_grid.nodes.shape).astype(float)
    courant = float(np.max(np.abs(speeds))) * dt / dx
    if courant > 1.0 + CFL_SLACK:
        raise CflViolation(
            f"row Courant number {courant:.6f} exceeds 1", max_speed=float(np.max(np.abs(speeds)))
        )
    out = kernels.levelset_step(np.asarray(field.values), speeds, dt / dx, spec.periodic)
    return LevelSetField(field.x_grid, field.y_grid, out, field.time_index + 1)


def extract_zero_contour(field: LevelSetField) -> StateVector:
    """Per-column linear root of c in y; exact for fields affine in y."""
    c = field.values
    y = field.y_grid.nodes
    nonneg = c >= 0.0
    flips = np.sum(nonneg[1:, :] != nonneg[:-1, :], axis=0)
    if np.any(flips == 0):
        col = int(np.argmax(flips == 0))
        raise NoSignChange(f"column {col} (x = {field.x_grid.nodes[col]:.4g}) never crosses zero")
    if np.any(flips > 1):
        col = int(np.argmax(flips > 1))
        raise MultipleSignChanges(
            f"column {col} (x = {field.x_grid.nodes[col]:.4g}) crosses zero {int(flips[col])} times"
        )
    idx = np.argmax(nonneg[1:, :] != nonneg[:-1, :], axis=0)
    cols = np.arange(c.shape[1])
    c_lo = c[idx, cols]
    c_hi = c[idx + 1, cols]
    frac = c_lo / (c_lo - c_hi)
    roots = y[idx] + frac * (y[idx + 1] - y[idx])
    return StateVector(roots, field.x_grid, field.time_index)


@dataclass
class LevelSetRun:
    """Training snapshots, contour trajectory, and final field of one 2-D run."""

    snapshots: SnapshotMatrix
    contours: np.ndarray
    x_grid: Grid1D
    y_grid: Grid1D
    final_field: LevelSetField
    wall_seconds: float


def run_levelset_hfm(
    spec: ProblemSpec,
    n_store: int,
    n_y: int = None,
    margin_frac: float = DEFAULT_MARGIN_FRAC,
) -> LevelSetRun:
    """Integrate the embedded field over the problem's full time horizon."""
    if n_store > spec.n_steps:
        raise ValueError("n_store cannot exceed the number of steps")
    kernels.warmup()
    started = time.perf_counter()
    x_grid = spec.grid()
    if n_y is None:
        n_y = max(len(x_grid) // 10, 8)
    u0_samples = np.asarray(spec.initial_u0(x_grid.nodes), dtype=float)
    y_grid = value_grid_for(u0_samples, n_y, margin_frac)
    field = embed_initial(spec.initial_u0, x_grid, y_grid)

    contours = np.empty((len(x_grid), spec.n_steps + 1))
    contours[:, 0] = extract_zero_contour(field).values
    stored = np.empty((len(x_grid) * n_y, n_store))
    for step in range(spec.n_steps):
        field = advance_levelset(field, spec, spec.dt)
        contours[:, step + 1] = extract_zero_contour(field).values
        if step < n_store:
            stored[:, step] = field.flattened()
    snaps = SnapshotMatrix(stored, np.arange(1, n_store + 1))
    elapsed = time.perf_counter() - started
    return LevelSetRun(snaps, contours, x_grid, y_grid, field, elapsed)


def levelset_dmd(snapshots, epsilon: float = None, fixed_rank: int = None) -> DmdModel:
    """DMD on flattened field snapshots."""
    return fit_dmd(snapshots, epsilon=epsilon, fixed_rank=fixed_rank, observable_kind=OBSERVABLE_LEVELSET)


def predicted_contour(model: DmdModel, k: int, x_grid: Grid1D, y_grid: Grid1D) -> StateVector:
    """Predict the field at index k, reshape, and extract its zero contour."""
    field = unflatten_field(predict(model, k), x_grid, y_grid, k)
    return extract_zero_contour(field)
