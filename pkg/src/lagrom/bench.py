"""Experiment runner: high-fidelity solves, reduced-model fits, error reports,
timing records, and CSV/JSON emission.

Conventions for the emitted files (all numeric output is full double
precision so reruns diff bit-identically):

* ``snapshots.csv``          training states, header ``t,x_1..x_N``, one row per time
* ``lagrangian_positions.csv`` / ``lagrangian_values.csv`` paired moving-frame data
* ``<method>_errors.csv``    columns n, t, error_state, error_observable, bound;
                             error_state is the relative L2 state error on the
                             reference grid, error_observable the absolute
                             2-norm error of the method's observable vector
* ``<method>_modes.csv``     leading three fitted modes (real and imaginary parts)
* ``timing.json``            wall-clock seconds per phase (excluded from determinism)
* ``manifest.json``          resolved configuration and file inventory
* ``plot.py``                standalone matplotlib script rendering the figures
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import kernels
from .core import linear_interpolate
from .dmd_rom import fit_dmd, fit_lagrangian_dmd, predict_series
from .errors import GridEntanglement, LagromError
from .error_analysis import (
    ErrorReport,
    error_bound_series,
    estimate_eps_m,
    last_training_index,
    phi_pinv_fnorm,
    relative_l2,
    truncation_error,
    write_error_csv,
)
from .hfm_eulerian import run_eulerian_hfm
from .hfm_lagrangian import run_lagrangian_hfm
from .levelset import levelset_dmd, predicted_contour, run_levelset_hfm
from .pod_rom import FRAME_EULERIAN, FRAME_LAGRANGIAN, fit_pod, run_pod_rom
from .presets import (
    METHOD_EULERIAN_DMD,
    METHOD_EULERIAN_POD,
    METHOD_LAGRANGIAN_DMD,
    METHOD_LAGRANGIAN_POD,
    METHOD_LEVELSET_DMD,
    ExperimentConfig,
    ResolvedExperiment,
    resolve,
)

_FMT = "%.17g"
OUTPUT_ROOT_ENV = "LAGROM_OUT_ROOT"


@dataclass
class MethodResult:
    """Outcome of one reduced-model method inside an experiment."""

    method: str
    rank: Optional[int] = None
    fit_seconds: Optional[float] = None
    rollout_seconds: Optional[float] = None
    newton_iterations: Optional[List[int]] = None
    failure: Optional[str] = None
    report: Optional[ErrorReport] = None
    states: Optional[np.ndarray] = None
    modes: Optional[np.ndarray] = None

    @property
    def total_seconds(self) -> Optional[float]:
        if self.fit_seconds is None or self.rollout_seconds is None:
            return None
        return self.fit_seconds + self.rollout_seconds


@dataclass
class RunRecord:
    """Everything measured during one experiment."""

    label: str
    description: str
    n_cells: int
    n_steps: int
    n_snapshots: int
    epsilon: Optional[float]
    fixed_rank: Optional[int]
    hfm_eulerian_seconds: float = 0.0
    hfm_lagrangian_seconds: Optional[float] = None
    hfm_levelset_seconds: Optional[float] = None
    methods: Dict[str, MethodResult] = field(default_factory=dict)
    output_dir: Optional[str] = None


def _time_call(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


def _dmd_report(model, reference_obs, predictions, rel_state, dt, horizon):
    """Observable errors with the affine bound past the training window.

    The bound slope uses the one-step residuals of the fitted propagator over
    the whole retained reference trajectory (not just the training window);
    the training-window residual alone understates how far an extrapolated
    trajectory leaves the learned subspace and would not stay above the
    measured error.
    """
    times = np.arange(1, horizon + 1)
    err_obs = truncation_error(reference_obs, predictions)
    eps_m = estimate_eps_m(model, reference_obs)
    m_last = last_training_index(model)
    anchor = float(err_obs[m_last - 1])
    bound = np.full(horizon, np.nan)
    tail = times >= m_last
    bound[tail] = error_bound_series(model, times[tail], anchor, eps_m)
    return ErrorReport(
        times=times,
        t_values=times * dt,
        error_state=rel_state,
        error_observable=err_obs,
        bound=bound,
        phi_pinv_fnorm=phi_pinv_fnorm(model),
        eps_m=eps_m,
        anchor_error=anchor,
        anchor_index=m_last,
    )


def _pod_report(reference_obs, reconstructions, rel_state, dt, horizon):
    times = np.arange(1, horizon + 1)
    return ErrorReport(
        times=times,
        t_values=times * dt,
        error_state=rel_state,
        error_observable=truncation_error(reference_obs, reconstructions),
        bound=None,
    )


def _leading_modes(matrix: np.ndarray, k: int = 3) -> np.ndarray:
    return np.asarray(matrix)[:, : min(k, matrix.shape[1])]


def _run_eulerian_dmd(resolved, euler_run, keep_states):
    spec = resolved.spec
    horizon = spec.n_steps
    model, fit_s = _time_call(
        fit_dmd, euler_run.snapshots, epsilon=resolved.epsilon, fixed_rank=resolved.fixed_rank
    )
    preds, roll_s = _time_call(predict_series, model, np.arange(1, horizon + 1))
    reference = euler_run.trajectory[:, 1:]
    report = _dmd_report(model, reference, preds, relative_l2(reference, preds), spec.dt, horizon)
    return MethodResult(
        method=METHOD_EULERIAN_DMD,
        rank=model.rank,
        fit_seconds=fit_s,
        rollout_seconds=roll_s,
        report=report,
        states=preds if keep_states else None,
        modes=_leading_modes(model.modes),
    )


def _run_eulerian_pod(resolved, euler_run, keep_states):
    spec = resolved.spec
    horizon = spec.n_steps
    basis, fit_s = _time_call(
        fit_pod,
        euler_run.snapshots,
        epsilon=resolved.epsilon,
        fixed_rank=resolved.fixed_rank,
        frame=FRAME_EULERIAN,
    )
    rollout, roll_s = _time_call(run_pod_rom, basis, euler_run.trajectory[:, 0], spec, horizon)
    recon = rollout.snapshots.data
    reference = euler_run.trajectory[:, 1:]
    report = _pod_report(reference, recon, relative_l2(reference, recon), spec.dt, horizon)
    return MethodResult(
        method=METHOD_EULERIAN_POD,
        rank=basis.rank,
        fit_seconds=fit_s,
        rollout_seconds=roll_s,
        newton_iterations=rollout.newton_iterations,
        report=report,
        states=recon if keep_states else None,
        modes=_leading_modes(basis.basis),
    )


def _lagrangian_reference(lagr_run):
    return np.vstack([lagr_run.positions[:, 1:], lagr_run.values[:, 1:]])


def _states_on_reference_grid(stacked_columns, euler_grid, spec):
    """Interpolate stacked [x; u] columns onto the fixed grid, column by column."""
    n = len(euler_grid)
    out = np.empty((n, stacked_columns.shape[1]))
    rule = (
        {"bc": "periodic", "period": spec.domain_length}
        if spec.periodic
        else {"bc": "clamp", "period": None}
    )
    for k in range(stacked_columns.shape[1]):
        col = stacked_columns[:, k]
        x, u = col[:n], col[n:]
        if np.any(np.diff(x) <= 0.0):
            raise GridEntanglement(
                f"reconstructed positions tangled at time index {k + 1}", time_index=k + 1
            )
        out[:, k] = linear_interpolate(x, u, euler_grid, **rule)
    return out


def _run_lagrangian_dmd(resolved, euler_run, lagr_run, keep_states):
    spec = resolved.spec
    horizon = spec.n_steps
    model, fit_s = _time_call(
        fit_lagrangian_dmd, lagr_run.snapshots, epsilon=resolved.epsilon, fixed_rank=resolved.fixed_rank
    )
    preds, roll_s = _time_call(predict_series, model, np.arange(1, horizon + 1))
    reference_obs = _lagrangian_reference(lagr_run)
    # State-space comparison happens on the fixed grid shared with the
    # reference solver; prediction columns must stay untangled to interpolate.
    states = _states_on_reference_grid(preds, euler_run.grid, spec)
    rel_state = relative_l2(euler_run.trajectory[:, 1:], states)
    report = _dmd_report(model, reference_obs, preds, rel_state, spec.dt, horizon)
    return MethodResult(
        method=METHOD_LAGRANGIAN_DMD,
        rank=model.rank,
        fit_seconds=fit_s,
        rollout_seconds=roll_s,
        report=report,
        states=states if keep_states else None,
        modes=_leading_modes(model.modes),
    )


def _run_lagrangian_pod(resolved, euler_run, lagr_run, keep_states):
    spec = resolved.spec
    horizon = spec.n_steps
    basis, fit_s = _time_call(
        fit_pod,
        lagr_run.snapshots,
        epsilon=resolved.epsilon,
        fixed_rank=resolved.fixed_rank,
        frame=FRAME_LAGRANGIAN,
    )
    z0 = np.concatenate([lagr_run.positions[:, 0], lagr_run.values[:, 0]])
    rollout, roll_s = _time_call(run_pod_rom, basis, z0, spec, horizon)
    recon = rollout.snapshots.data
    reference_obs = _lagrangian_reference(lagr_run)
    states = _states_on_reference_grid(recon, euler_run.grid, spec)
    rel_state = relative_l2(euler_run.trajectory[:, 1:], states)
    report = _pod_report(reference_obs, recon, rel_state, spec.dt, horizon)
    return MethodResult(
        method=METHOD_LAGRANGIAN_POD,
        rank=basis.rank,
        fit_seconds=fit_s,
        rollout_seconds=roll_s,
        newton_iterations=rollout.newton_iterations,
        report=report,
        states=states if keep_states else None,
        modes=_leading_modes(basis.basis),
    )


def _run_levelset_dmd(resolved, euler_run, level_run, keep_states):
    spec = resolved.spec
    horizon = spec.n_steps
    model, fit_s = _time_call(
        levelset_dmd, level_run.snapshots, epsilon=resolved.epsilon, fixed_rank=resolved.fixed_rank
    )
    t0 = time.perf_counter()
    contours = np.empty((len(level_run.x_grid), horizon))
    for k in range(1, horizon + 1):
        contours[:, k - 1] = predicted_contour(model, k, level_run.x_grid, level_run.y_grid).values
    roll_s = time.perf_counter() - t0
    reference = euler_run.trajectory[:, 1:]
    rel_state = relative_l2(reference, contours)
    times = np.arange(1, horizon + 1)
    report = ErrorReport(
        times=times,
        t_values=times * spec.dt,
        error_state=rel_state,
        error_observable=truncation_error(reference, contours),
        bound=None,
    )
    return MethodResult(
        method=METHOD_LEVELSET_DMD,
        rank=model.rank,
        fit_seconds=fit_s,
        rollout_seconds=roll_s,
        report=report,
        states=contours if keep_states else None,
        modes=_leading_modes(model.modes),
    )


def default_output_dir(label: str) -> Path:
    root = os.environ.get(OUTPUT_ROOT_ENV, "runs")
    return Path(root) / label


def run_experiment(config: ExperimentConfig, keep_states: bool = False, emit: bool = True) -> RunRecord:
    """Run the requested high-fidelity solves and reduced models.

    Per-method failures are captured in the record instead of aborting the
    experiment; a reduced model falling apart is a reportable outcome.
    """
    resolved = resolve(config)
    spec = resolved.spec
    spec.validate_flux_consistency()
    kernels.warmup()

    record = RunRecord(
        label=resolved.label,
        description=resolved.description,
        n_cells=spec.n_cells,
        n_steps=spec.n_steps,
        n_snapshots=resolved.n_snapshots,
        epsilon=resolved.epsilon,
        fixed_rank=resolved.fixed_rank,
    )

    euler_run = run_eulerian_hfm(spec, resolved.n_snapshots)
    record.hfm_eulerian_seconds = euler_run.wall_seconds

    lagr_run = None
    if {METHOD_LAGRANGIAN_DMD, METHOD_LAGRANGIAN_POD} & set(resolved.methods):
        lagr_run = run_lagrangian_hfm(spec, resolved.n_snapshots)
        record.hfm_lagrangian_seconds = lagr_run.wall_seconds

    level_run = None
    if METHOD_LEVELSET_DMD in resolved.methods:
        level_run = run_levelset_hfm(spec, resolved.n_snapshots, n_y=resolved.n_y)
        record.hfm_levelset_seconds = level_run.wall_seconds

    runners = {
        METHOD_EULERIAN_DMD: lambda: _run_eulerian_dmd(resolved, euler_run, keep_states),
        METHOD_EULERIAN_POD: lambda: _run_eulerian_pod(resolved, euler_run, keep_states),
        METHOD_LAGRANGIAN_DMD: lambda: _run_lagrangian_dmd(resolved, euler_run, lagr_run, keep_states),
        METHOD_LAGRANGIAN_POD: lambda: _run_lagrangian_pod(resolved, euler_run, lagr_run, keep_states),
        METHOD_LEVELSET_DMD: lambda: _run_levelset_dmd(resolved, euler_run, level_run, keep_states),
    }
    for method in resolved.methods:
        try:
            record.methods[method] = runners[method]()
        except LagromError as exc:
            record.methods[method] = MethodResult(method=method, failure=f"{type(exc).__name__}: {exc}")

    if emit:
        out_dir = Path(config.output_dir) if config.output_dir else default_output_dir(resolved.label)
        out_dir.mkdir(parents=True, exist_ok=True)
        _emit_outputs(out_dir, resolved, record, euler_run, lagr_run, level_run)
        record.output_dir = str(out_dir)
    return record


def _write_snapshot_csv(path, times_dt, data, preamble=None):
    """Rows are states over time; data columns are snapshots."""
    n = data.shape[0]
    header = "t," + ",".join(f"x_{j + 1}" for j in range(n))
    with open(path, "w") as fh:
        if preamble:
            fh.write(preamble + "\n")
        fh.write(header + "\n")
        for k in range(data.shape[1]):
            row = ",".join(_FMT % v for v in data[:, k])
            fh.write(f"{_FMT % times_dt[k]},{row}\n")


def _write_modes_csv(path, coords, modes):
    cols = []
    for j in range(modes.shape[1]):
        cols.append((f"mode{j + 1}_re", np.real(modes[:, j])))
        cols.append((f"mode{j + 1}_im", np.imag(modes[:, j])))
    header = "coord," + ",".join(name for name, _ in cols)
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for i in range(modes.shape[0]):
            vals = ",".join(_FMT % arr[i] for _, arr in cols)
            fh.write(f"{_FMT % coords[i]},{vals}\n")


def _emit_outputs(out_dir: Path, resolved: ResolvedExperiment, record: RunRecord, euler_run, lagr_run, level_run=None):
    spec = resolved.spec
    m = resolved.n_snapshots
    dt = spec.dt
    snap_times = np.arange(1, m + 1) * dt

    _write_snapshot_csv(out_dir / "snapshots.csv", snap_times, euler_run.snapshots.data)
    if lagr_run is not None:
        _write_snapshot_csv(out_dir / "lagrangian_positions.csv", snap_times, lagr_run.positions[:, 1 : m + 1])
        _write_snapshot_csv(out_dir / "lagrangian_values.csv", snap_times, lagr_run.values[:, 1 : m + 1])

    euler_coords = euler_run.grid.nodes
    files = ["snapshots.csv"]
    if lagr_run is not None:
        files += ["lagrangian_positions.csv", "lagrangian_values.csv"]
    if level_run is not None:
        # flattened 2-D fields reuse the snapshot schema with the grid shape
        # declared up front so readers can reshape
        dims = f"# n_x={len(level_run.x_grid)},n_y={len(level_run.y_grid)},order=column-major"
        _write_snapshot_csv(out_dir / "levelset_snapshots.csv", snap_times, level_run.snapshots.data, preamble=dims)
        files.append("levelset_snapshots.csv")
    for name, result in record.methods.items():
        if result.report is not None:
            err_path = out_dir / f"{name}_errors.csv"
            write_error_csv(result.report, err_path)
            files.append(err_path.name)
        if result.modes is not None:
            coords = euler_coords if result.modes.shape[0] == euler_coords.size else np.arange(result.modes.shape[0], dtype=float)
            modes_path = out_dir / f"{name}_modes.csv"
            _write_modes_csv(modes_path, coords, result.modes)
            files.append(modes_path.name)

    timing = {
        "hfm_eulerian_seconds": record.hfm_eulerian_seconds,
        "hfm_lagrangian_seconds": record.hfm_lagrangian_seconds,
        "hfm_levelset_seconds": record.hfm_levelset_seconds,
        "methods": {
            name: {
                "rank": res.rank,
                "fit_seconds": res.fit_seconds,
                "rollout_seconds": res.rollout_seconds,
                "total_seconds": res.total_seconds,
                "failure": res.failure,
            }
            for name, res in record.methods.items()
        },
        "label": record.label,
    }
    with open(out_dir / "timing.json", "w") as fh:
        json.dump(timing, fh, indent=2)

    manifest = {
        "label": record.label,
        "description": record.description,
        "deterministic": True,
        "n_cells": record.n_cells,
        "n_steps": record.n_steps,
        "n_snapshots": record.n_snapshots,
        "epsilon": record.epsilon,
        "fixed_rank": record.fixed_rank,
        "dt": dt,
        "dx": spec.dx,
        "bc": spec.bc,
        "methods": list(record.methods),
        "figures": {
            "profiles": "solution profiles from snapshots.csv and method states",
            "errors": "error curves and bounds from <method>_errors.csv",
            "modes": "leading mode shapes from <method>_modes.csv",
            "cost": "wall-clock comparison from timing.json",
        },
        "files": sorted(set(files)) + ["timing.json", "manifest.json", "plot.py"],
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)

    (out_dir / "plot.py").write_text(_PLOT_TEMPLATE)


_PLOT_TEMPLATE = '''"""Render the emitted CSVs of this run directory (requires matplotlib)."""
import csv
import json
from pathlib import Path

import matplotlib.pyplot as plt

HERE = Path(__file__).parent
manifest = json.loads((HERE / "manifest.json").read_text())


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {name: [float(r[i]) if r[i] else float("nan") for r in body] for i, name in enumerate(header)}
    return cols


snap = read_csv(HERE / "snapshots.csv")
xs = list(range(len(snap) - 1))
fig, ax = plt.subplots()
times = snap["t"]
for pick in {0, len(times) // 2, len(times) - 1}:
    profile = [snap[f"x_{j + 1}"][pick] for j in xs]
    ax.plot(profile, label=f"t = {times[pick]:.3f}")
ax.set_title(f"{manifest['label']}: training profiles")
ax.legend()
fig.savefig(HERE / "profiles.png", dpi=150)

fig, ax = plt.subplots()
for name in manifest["methods"]:
    path = HERE / f"{name}_errors.csv"
    if not path.exists():
        continue
    err = read_csv(path)
    ax.semilogy(err["t"], err["error_observable"], label=f"{name} error")
    if any(b == b for b in err["bound"]):
        ax.semilogy(err["t"], err["bound"], "--", label=f"{name} bound")
ax.set_title(f"{manifest['label']}: errors")
ax.set_xlabel("t")
ax.legend()
fig.savefig(HERE / "errors.png", dpi=150)

fig, ax = plt.subplots()
for name in manifest["methods"]:
    path = HERE / f"{name}_modes.csv"
    if not path.exists():
        continue
    modes = read_csv(path)
    for key in modes:
        if key.endswith("_re"):
            ax.plot(modes["coord"], modes[key], label=f"{name} {key}")
ax.set_title(f"{manifest['label']}: leading modes")
ax.legend(fontsize=6)
fig.savefig(HERE / "modes.png", dpi=150)
print("wrote profiles.png, errors.png, modes.png")
'''


def timing_table(records: List[RunRecord]):
    """Cost summary across experiments: one column per run, fixed row set."""
    if not records:
        raise ValueError("need at least one record")
    labels = [r.label for r in records]

    def method_total(record, suffix):
        for name, res in record.methods.items():
            if name.endswith(suffix) and res.total_seconds is not None:
                return res.total_seconds
        return None

    def method_rank(record):
        for res in record.methods.values():
            if res.rank is not None:
                return res.rank
        return None

    rows = [
        ("rank", [method_rank(r) for r in records]),
        ("dmd_seconds", [method_total(r, "-dmd") for r in records]),
        ("pod_seconds", [method_total(r, "-pod") for r in records]),
        ("eulerian_hfm_seconds", [r.hfm_eulerian_seconds for r in records]),
        ("lagrangian_hfm_seconds", [r.hfm_lagrangian_seconds for r in records]),
    ]
    rows = [(name, vals) for name, vals in rows if any(v is not None for v in vals)]

    width = max(12, *(len(lbl) for lbl in labels)) + 2
    name_w = max(len(name) for name, _ in rows) + 2
    lines = [" " * name_w + "".join(lbl.rjust(width) for lbl in labels)]
    for name, vals in rows:
        cells = []
        for v in vals:
            if v is None:
                cells.append("-".rjust(width))
            elif name == "rank":
                cells.append(str(v).rjust(width))
            else:
                cells.append(f"{v:.6f}".rjust(width))
        lines.append(name.ljust(name_w) + "".join(cells))
    table = "\n".join(lines)
    data = {name: {lbl: vals[i] for i, lbl in enumerate(labels)} for name, vals in rows}
    return table, data


def load_timing(run_dir) -> RunRecord:
    """Rebuild a minimal record from an emitted timing.json."""
    with open(Path(run_dir) / "timing.json") as fh:
        payload = json.load(fh)
    record = RunRecord(
        label=payload.get("label", Path(run_dir).name),
        description="",
        n_cells=0,
        n_steps=0,
        n_snapshots=0,
        epsilon=None,
        fixed_rank=None,
        hfm_eulerian_seconds=payload.get("hfm_eulerian_seconds", 0.0),
        hfm_lagrangian_seconds=payload.get("hfm_lagrangian_seconds"),
        hfm_levelset_seconds=payload.get("hfm_levelset_seconds"),
        output_dir=str(run_dir),
    )
    for name, info in payload.get("methods", {}).items():
        record.methods[name] = MethodResult(
            method=name,
            rank=info.get("rank"),
            fit_seconds=info.get("fit_seconds"),
            rollout_seconds=info.get("rollout_seconds"),
            failure=info.get("failure"),
        )
    return record


def validate_run_dir(run_dir) -> List[tuple]:
    """Re-check invariants on the emitted files; returns (check, ok, detail) rows."""
    run_dir = Path(run_dir)
    checks = []

    def add(name, ok, detail=""):
        checks.append((name, bool(ok), detail))

    manifest_path = run_dir / "manifest.json"
    if not manifest_path.exists():
        add("manifest exists", False, "manifest.json missing")
        return checks
    manifest = json.loads(manifest_path.read_text())
    add("manifest exists", True)
    add("deterministic flag", manifest.get("deterministic") is True)

    snap_path = run_dir / "snapshots.csv"
    if snap_path.exists():
        body = np.genfromtxt(snap_path, delimiter=",", skip_header=1)
        body = np.atleast_2d(body)
        add("snapshots finite", np.all(np.isfinite(body)))
        add(
            "snapshot width matches n_cells",
            body.shape[1] == manifest["n_cells"] + 1,
            f"{body.shape[1] - 1} columns vs n_cells {manifest['n_cells']}",
        )
        add("snapshot times increasing", np.all(np.diff(body[:, 0]) > 0) if body.shape[0] > 1 else True)
    else:
        add("snapshots exist", False)

    for name in manifest.get("methods", []):
        err_path = run_dir / f"{name}_errors.csv"
        if not err_path.exists():
            continue
        raw = np.genfromtxt(err_path, delimiter=",", skip_header=1, filling_values=np.nan)
        raw = np.atleast_2d(raw)
        n_idx, err_obs, bound = raw[:, 0], raw[:, 3], raw[:, 4]
        add(f"{name} errors nonnegative", np.all(err_obs[~np.isnan(err_obs)] >= 0))
        has_bound = ~np.isnan(bound)
        if np.any(has_bound):
            ok = np.all(bound[has_bound] + 1e-12 >= err_obs[has_bound])
            add(f"{name} bound dominates error", ok)
            idx = n_idx[has_bound]
            b = bound[has_bound]
            if idx.size >= 3:
                slopes = np.diff(b) / np.diff(idx)
                affine = np.allclose(slopes, slopes[0], rtol=1e-8, atol=1e-12)
                add(f"{name} bound affine", affine)

    timing_path = run_dir / "timing.json"
    add("timing exists", timing_path.exists())
    if timing_path.exists():
        payload = json.loads(timing_path.read_text())
        add("timing label matches", payload.get("label") == manifest.get("label"))
    return checks
