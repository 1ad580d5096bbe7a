"""Dynamic mode decomposition: plain state-observable fits and the
moving-frame variant whose observable stacks grid positions over carried
values.

A fitted model holds complex modes, eigenvalues and amplitudes; prediction at
any future index is a single superposition evaluation (no time stepping), so
its cost does not grow with the prediction horizon.

Numerical note: the prediction ``modes @ (eigenvalues**k * amplitudes)`` is
evaluated through the algebraically identical projector form
``U @ K^k @ (U^T y_base)`` whenever the factors from the fit are available.
For snapshot data whose one-step operator is nearly defective (for example a
state growing linearly in time), the eigenvector basis is ill-conditioned and
the naive mode superposition cancels ~half of its floating-point digits; the
projector form keeps every intermediate at the scale of the data and stays
accurate to rounding. Both paths return the same mathematical value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import Grid1D, SnapshotMatrix, linear_interpolate, split_stacked
from .errors import (
    DimensionMismatch,
    GridEntanglement,
    NumericalFailure,
    RankDeficient,
    TooFewSnapshots,
)
from .svd_core import reduced_svd, truncate, truncation_rank

OBSERVABLE_STATE = "state"
OBSERVABLE_STACKED = "lagrangian-stacked"
OBSERVABLE_LEVELSET = "levelset-field"

_IMAG_TOL = 1e-6


@dataclass(frozen=True)
class ObservableMap:
    """Forward/inverse map between solver state and DMD observable vectors.

    The stacked map is an exact bijection: forward concatenates positions over
    values, inverse splits at the midpoint row.
    """

    kind: str

    def forward(self, values: np.ndarray, positions: np.ndarray = None) -> np.ndarray:
        if self.kind == OBSERVABLE_STACKED:
            if positions is None:
                raise DimensionMismatch("stacked observable needs grid positions")
            return np.concatenate([np.asarray(positions, float), np.asarray(values, float)])
        return np.asarray(values, dtype=float)

    def inverse(self, observable: np.ndarray) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        if self.kind == OBSERVABLE_STACKED:
            positions, values = split_stacked(np.asarray(observable, float)[:, None])
            return values[:, 0], positions[:, 0]
        return np.asarray(observable, dtype=float), None


@dataclass(frozen=True)
class DmdModel:
    modes: np.ndarray
    eigenvalues: np.ndarray
    amplitudes: np.ndarray
    mode_pseudoinverse: np.ndarray
    observable_kind: str
    base_time_index: int
    training_count: int
    train_residual: float
    requested_rank: Optional[int]
    real_input: bool
    # Orthonormal data basis, reduced one-step operator, and projected anchor
    # snapshot; carried for the numerically robust prediction path.
    projector: Optional[np.ndarray] = None
    reduced_operator: Optional[np.ndarray] = None
    projected_anchor: Optional[np.ndarray] = None

    @property
    def rank(self) -> int:
        return self.eigenvalues.size

    @property
    def n_rows(self) -> int:
        return self.modes.shape[0]


def split_pairs(snapshots) -> Tuple[np.ndarray, np.ndarray]:
    """Shifted column pairs (Y1, Y2) = (columns 1..m-1, columns 2..m)."""
    data = snapshots.data if isinstance(snapshots, SnapshotMatrix) else np.asarray(snapshots)
    if data.ndim != 2 or data.shape[1] < 2:
        raise TooFewSnapshots("need at least two snapshot columns")
    return data[:, :-1], data[:, 1:]


def _resolve_training(snapshots, base_time_index):
    if isinstance(snapshots, SnapshotMatrix):
        data = snapshots.data
        if not snapshots.has_unit_stride():
            raise DimensionMismatch("training snapshots must have unit time stride")
        base = int(snapshots.col_times[0]) if snapshots.n_snapshots else 0
    else:
        data = np.asarray(snapshots, dtype=float)
        base = 1
    if base_time_index is not None:
        base = int(base_time_index)
    return data, base


def fit_dmd(
    snapshots,
    epsilon: float = None,
    fixed_rank: int = None,
    observable_kind: str = OBSERVABLE_STATE,
    base_time_index: int = None,
) -> DmdModel:
    """Fit a DMD model on consecutive snapshot columns.

    Exactly one of ``epsilon`` (share-based rank selection) or ``fixed_rank``
    must be given. A fixed rank beyond the numerical rank of the first data
    block is clamped down to it, since the trailing singular values carry no
    information and their inverses would poison the reduced operator.
    """
    if (epsilon is None) == (fixed_rank is None):
        raise ValueError("provide exactly one of epsilon or fixed_rank")
    data, base = _resolve_training(snapshots, base_time_index)
    y1, y2 = split_pairs(data)
    m = data.shape[1]

    svd = reduced_svd(y1)
    if epsilon is not None:
        r = truncation_rank(svd.singular_values, epsilon)
    else:
        if fixed_rank < 1:
            raise RankDeficient("fixed_rank must be positive")
        r = min(int(fixed_rank), svd.rank)
    svd_r = truncate(svd, r)
    if np.any(svd_r.singular_values == 0.0):
        raise RankDeficient(f"zero singular value inside requested rank {r}")

    u, s, v = svd_r.left_vectors, svd_r.singular_values, svd_r.right_vectors
    k_tilde = (u.T @ y2 @ v) / s[None, :]
    eigvals, w = np.linalg.eig(k_tilde)
    modes = u @ w
    pinv = np.linalg.pinv(modes)
    ident = pinv @ modes
    if np.max(np.abs(ident - np.eye(r))) > 1e-8:
        raise NumericalFailure("mode pseudoinverse lost left-inverse property")
    amplitudes = pinv @ data[:, 0]
    anchor_proj = u.T @ data[:, 0]

    # One-step training residual, reused as the growth-rate estimate in the
    # a-posteriori error bound.
    stepped = u @ (k_tilde @ (u.T @ y1))
    resid = float(np.max(np.linalg.norm(y2 - stepped, axis=0)))

    return DmdModel(
        modes=modes,
        eigenvalues=eigvals,
        amplitudes=amplitudes,
        mode_pseudoinverse=pinv,
        observable_kind=observable_kind,
        base_time_index=base,
        training_count=m,
        train_residual=resid,
        requested_rank=fixed_rank,
        real_input=bool(np.isrealobj(data)),
        projector=u,
        reduced_operator=k_tilde,
        projected_anchor=anchor_proj,
    )


def fit_lagrangian_dmd(stacked_snapshots, epsilon: float = None, fixed_rank: int = None) -> DmdModel:
    """DMD on the stacked [positions; values] observable (rows must be 2N)."""
    data = stacked_snapshots.data if isinstance(stacked_snapshots, SnapshotMatrix) else np.asarray(stacked_snapshots)
    if data.shape[0] % 2:
        raise DimensionMismatch("stacked observable matrix must have an even row count")
    return fit_dmd(stacked_snapshots, epsilon=epsilon, fixed_rank=fixed_rank, observable_kind=OBSERVABLE_STACKED)


def one_step_map(model: DmdModel, columns: np.ndarray) -> np.ndarray:
    """Apply the fitted one-step propagator to each column."""
    cols = np.asarray(columns)
    if model.projector is not None:
        out = model.projector @ (model.reduced_operator @ (model.projector.T.conj() @ cols))
    else:
        out = model.modes @ (model.eigenvalues[:, None] * (model.mode_pseudoinverse @ cols))
    return out.real if model.real_input else out


def _check_imag(result: np.ndarray, model: DmdModel) -> np.ndarray:
    real = result.real
    if model.real_input and np.iscomplexobj(result):
        imag_norm = float(np.linalg.norm(result.imag))
        scale = max(float(np.linalg.norm(real)), 1e-300)
        if imag_norm > _IMAG_TOL * scale:
            raise NumericalFailure(
                f"prediction imaginary part {imag_norm:.3e} exceeds {_IMAG_TOL:g} of magnitude {scale:.3e}"
            )
    return real


def predict(model: DmdModel, k: int) -> np.ndarray:
    """Observable at time index k via eigenvalue powers from the anchor snapshot.

    Single evaluation, no rollout; see the module docstring for the projector
    form used when the fit factors are cached on the model.
    """
    if k < model.base_time_index:
        raise ValueError(f"prediction index {k} precedes anchor {model.base_time_index}")
    power = k - model.base_time_index
    if model.projector is not None:
        op_pow = np.linalg.matrix_power(model.reduced_operator, power)
        return _check_imag(model.projector @ (op_pow @ model.projected_anchor), model)
    weights = model.eigenvalues**power * model.amplitudes
    return _check_imag(model.modes @ weights, model)


def predict_series(model: DmdModel, indices) -> np.ndarray:
    """Column-stacked predictions for many indices."""
    idx = np.asarray(indices, dtype=int)
    if np.any(idx < model.base_time_index):
        raise ValueError("prediction indices precede the anchor snapshot")
    powers = idx - model.base_time_index
    if model.projector is not None:
        reduced = np.empty((model.projected_anchor.size, idx.size), dtype=model.reduced_operator.dtype)
        for j, p in enumerate(powers):
            reduced[:, j] = np.linalg.matrix_power(model.reduced_operator, int(p)) @ model.projected_anchor
        return _check_imag(model.projector @ reduced, model)
    lam = model.eigenvalues[:, None] ** powers[None, :]
    return _check_imag(model.modes @ (lam * model.amplitudes[:, None]), model)


@dataclass(frozen=True)
class ReconstructedState:
    """State-space view of one predicted observable."""

    values_eulerian: np.ndarray
    positions: Optional[np.ndarray] = None
    values_moving: Optional[np.ndarray] = None


def reconstruct_state(
    model: DmdModel,
    prediction: np.ndarray,
    eulerian_grid: Grid1D,
    bc: str = "clamp",
    period: float = None,
) -> ReconstructedState:
    """Map a predicted observable back to values on the reference grid.

    For stacked observables the position block must be strictly increasing;
    crossings mean the predicted moving grid is unusable.
    """
    pred = np.asarray(prediction, dtype=float)
    if model.observable_kind == OBSERVABLE_STACKED:
        positions, values = pred[: pred.size // 2], pred[pred.size // 2 :]
        if pred.size != 2 * len(eulerian_grid):
            raise DimensionMismatch("stacked prediction must have 2N rows")
        if np.any(np.diff(positions) <= 0.0):
            raise GridEntanglement("predicted positions are not strictly increasing")
        on_euler = linear_interpolate(positions, values, eulerian_grid, bc=bc, period=period)
        return ReconstructedState(on_euler, positions, values)
    if pred.size != len(eulerian_grid):
        raise DimensionMismatch("prediction length must match the grid")
    return ReconstructedState(pred)


_FMT = "%.17g"


def save_dmd_model(model: DmdModel, path) -> None:
    """Plain-text serialization: header lines then CSV blocks of the factors."""
    lines = [
        "lagrom-dmd-v1",
        f"kind={model.observable_kind}",
        f"base_time_index={model.base_time_index}",
        f"training_count={model.training_count}",
        f"rank={model.rank}",
        f"rows={model.n_rows}",
        f"train_residual={_FMT % model.train_residual}",
        f"real_input={int(model.real_input)}",
        f"requested_rank={'' if model.requested_rank is None else model.requested_rank}",
    ]

    def csv_row(arr):
        return ",".join(_FMT % x for x in arr)

    def matrix_block(name, matrix):
        lines.append(f"[{name}_re]")
        lines.extend(csv_row(row) for row in np.atleast_2d(matrix.real))
        lines.append(f"[{name}_im]")
        lines.extend(csv_row(row) for row in np.atleast_2d(matrix.imag))

    lines.append("[eigenvalues_re]")
    lines.append(csv_row(model.eigenvalues.real))
    lines.append("[eigenvalues_im]")
    lines.append(csv_row(model.eigenvalues.imag))
    lines.append("[amplitudes_re]")
    lines.append(csv_row(model.amplitudes.real))
    lines.append("[amplitudes_im]")
    lines.append(csv_row(model.amplitudes.imag))
    matrix_block("modes", model.modes)
    if model.projector is not None:
        matrix_block("projector", np.asarray(model.projector, dtype=complex))
        matrix_block("reduced_operator", np.asarray(model.reduced_operator, dtype=complex))
        lines.append("[projected_anchor_re]")
        lines.append(csv_row(np.asarray(model.projected_anchor, dtype=complex).real))
        lines.append("[projected_anchor_im]")
        lines.append(csv_row(np.asarray(model.projected_anchor, dtype=complex).imag))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_dmd_model(path) -> DmdModel:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != "lagrom-dmd-v1":
        raise ValueError("not a recognized model file")
    header = {}
    i = 1
    while i < len(lines) and not lines[i].startswith("["):
        key, _, val = lines[i].partition("=")
        header[key] = val
        i += 1
    blocks = {}
    current = None
    for ln in lines[i:]:
        if ln.startswith("[") and ln.endswith("]"):
            current = ln[1:-1]
            blocks[current] = []
        elif current is not None and ln:
            blocks[current].append(np.array([float(x) for x in ln.split(",")]))

    def block(name):
        rows = blocks.get(name)
        return np.array(rows) if rows else None

    def complex_block(name):
        re, im = block(f"{name}_re"), block(f"{name}_im")
        return None if re is None else re + 1j * im

    eigvals = complex_block("eigenvalues")[0]
    amps = complex_block("amplitudes")[0]
    modes = complex_block("modes")
    pinv = np.linalg.pinv(modes)
    projector = complex_block("projector")
    reduced_op = complex_block("reduced_operator")
    anchor = complex_block("projected_anchor")
    real_input = bool(int(header.get("real_input", "1")))
    if projector is not None and real_input and np.allclose(projector.imag, 0.0):
        projector = projector.real
        reduced_op = reduced_op.real
        anchor = anchor[0].real
    elif anchor is not None:
        anchor = anchor[0]
    req = header.get("requested_rank", "")
    return DmdModel(
        modes=modes,
        eigenvalues=eigvals,
        amplitudes=amps,
        mode_pseudoinverse=pinv,
        observable_kind=header["kind"],
        base_time_index=int(header["base_time_index"]),
        training_count=int(header["training_count"]),
        train_residual=float(header["train_residual"]),
        requested_rank=int(req) if req else None,
        real_input=real_input,
        projector=projector,
        reduced_operator=reduced_op,
        projected_anchor=anchor,
    )
