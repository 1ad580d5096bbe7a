"""Reduced-order modeling of 1-D advection-diffusion problems.

High-fidelity Eulerian and semi-Lagrangian solvers, POD- and DMD-based
reduced models in both frames, a-posteriori error bounds, a level-set
embedding for conservation laws, and a benchmark CLI around preset
experiments.
"""

from .core import (
    DIRICHLET_ZERO,
    PERIODIC,
    Grid1D,
    ProblemSpec,
    SnapshotMatrix,
    StateVector,
    assemble_snapshots,
    linear_interpolate,
    split_stacked,
    uniform_grid,
)
from .dmd_rom import (
    DmdModel,
    ObservableMap,
    fit_dmd,
    fit_lagrangian_dmd,
    load_dmd_model,
    predict,
    predict_series,
    reconstruct_state,
    save_dmd_model,
    split_pairs,
)
from .error_analysis import (
    ErrorReport,
    error_bound,
    error_bound_series,
    estimate_eps_m,
    relative_l2,
    truncation_error,
    write_error_csv,
)
from .hfm_eulerian import (
    EulerianRun,
    EulerianStepWorkspace,
    advance_eulerian,
    numerical_flux,
    run_eulerian_hfm,
)
from .hfm_lagrangian import (
    LagrangianRun,
    LagrangianState,
    advance_lagrangian,
    initial_lagrangian_state,
    run_lagrangian_hfm,
)
from .levelset import (
    LevelSetField,
    advance_levelset,
    embed_initial,
    extract_zero_contour,
    levelset_dmd,
    predicted_contour,
    run_levelset_hfm,
)
from .pod_rom import (
    PodBasis,
    fit_pod,
    pod_step_eulerian,
    pod_step_lagrangian,
    run_pod_rom,
)
from .presets import ExperimentConfig, parse_config_file, resolve
from .bench import RunRecord, run_experiment, timing_table, validate_run_dir
from .svd_core import TruncatedSvd, reduced_svd, truncate, truncation_rank
from . import errors

__version__ = "0.1.0"
