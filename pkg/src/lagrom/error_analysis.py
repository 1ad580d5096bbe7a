"""Truncation errors of reduced models and the a-posteriori linear error bound.

The bound at index n >= m (m = last training index) is

    ||pinv(modes)||_F * ( ||e^m||_2 + (n - m) * eps_m )

where eps_m is estimated as the worst one-step residual of the fitted model
over its own training pairs. Validity (bound >= measured error) is the
asserted property; tightness is not.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import SnapshotMatrix
from .dmd_rom import DmdModel, one_step_map
from .errors import DimensionMismatch, IndexBeforeAnchor


def _as_array(data) -> np.ndarray:
    return data.data if isinstance(data, SnapshotMatrix) else np.asarray(data, dtype=float)


def truncation_error(reference, rom) -> np.ndarray:
    """Per-column 2-norm differences between matching trajectories."""
    ref = _as_array(reference)
    approx = _as_array(rom)
    if ref.shape != approx.shape:
        raise DimensionMismatch(f"shape mismatch {ref.shape} vs {approx.shape}")
    return np.linalg.norm(ref - approx, axis=0)


def relative_l2(reference, rom, floor: float = 1e-300) -> np.ndarray:
    """Column-wise ||ref - rom|| / ||ref||, falling back to absolute on zero columns."""
    ref = _as_array(reference)
    diff = truncation_error(reference, rom)
    scale = np.linalg.norm(ref, axis=0)
    return diff / np.maximum(scale, floor)


def last_training_index(model: DmdModel) -> int:
    return model.base_time_index + model.training_count - 1


def estimate_eps_m(model: DmdModel, training) -> float:
    """Worst one-step residual of the fitted propagator on the training pairs."""
    y = _as_array(training)
    if y.shape[1] < 2:
        return 0.0
    stepped = one_step_map(model, y[:, :-1])
    return float(np.max(np.linalg.norm(y[:, 1:] - stepped, axis=0)))


def phi_pinv_fnorm(model: DmdModel) -> float:
    return float(np.linalg.norm(model.mode_pseudoinverse, "fro"))


def error_bound(model: DmdModel, n: int, anchor_error: float, eps_m: float) -> float:
    """Bound on the observable error at index n (affine in n past the anchor)."""
    m = last_training_index(model)
    if n < m:
        raise IndexBeforeAnchor(f"index {n} precedes last training index {m}")
    return phi_pinv_fnorm(model) * (anchor_error + (n - m) * eps_m)


def error_bound_series(model: DmdModel, indices, anchor_error: float, eps_m: float) -> np.ndarray:
    idx = np.asarray(indices, dtype=int)
    if idx.size and idx.min() < last_training_index(model):
        raise IndexBeforeAnchor("series starts before the last training index")
    return phi_pinv_fnorm(model) * (anchor_error + (idx - last_training_index(model)) * eps_m)


@dataclass
class ErrorReport:
    """Per-index error curves of one reduced model against a reference."""

    times: np.ndarray
    t_values: np.ndarray
    error_state: Optional[np.ndarray]
    error_observable: np.ndarray
    bound: Optional[np.ndarray] = None
    phi_pinv_fnorm: Optional[float] = None
    eps_m: Optional[float] = None
    anchor_error: Optional[float] = None
    anchor_index: Optional[int] = None

    def bound_is_valid(self) -> bool:
        """Bound must dominate the observable error wherever both are defined."""
        if self.bound is None:
            return True
        mask = ~np.isnan(self.bound)
        return bool(np.all(self.bound[mask] + 1e-12 >= self.error_observable[mask]))


_FMT = "%.17g"


def write_error_csv(report: ErrorReport, path) -> None:
    """Columns: n, t, error_state, error_observable, bound (blank where absent)."""
    with open(path, "w") as fh:
        fh.write("n,t,error_state,error_observable,bound\n")
        for i, n in enumerate(report.times):
            state = "" if report.error_state is None else _FMT % report.error_state[i]
            bound = ""
            if report.bound is not None and not np.isnan(report.bound[i]):
                bound = _FMT % report.bound[i]
            fh.write(
                f"{int(n)},{_FMT % report.t_values[i]},{state},{_FMT % report.error_observable[i]},{bound}\n"
            )
