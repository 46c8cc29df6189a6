"""Temporal ghost imaging from a single exposure.

Frame stacks are NumPy arrays shaped (K, rows, cols); exposures are (m, m).
"""

from ._ctgi import (
    Basis,
    DegeneratePatternError,
    Error,
    FormatError,
    Geometry,
    RankDeficientError,
    SolverError,
    apply_threshold,
    compute_metrics,
    direct_capture,
    hadamard_basis,
    plan_sampling,
    random_basis,
    read_basis,
    read_exposure,
    read_frames,
    reconstruct_correlation,
    reconstruct_cs,
    reconstruct_exact,
    reconstruct_sliding,
    simulate,
    solve_tv,
    tv_objective,
    upsample_scene,
    write_basis,
    write_exposure,
    write_frames,
)

__all__ = [
    "Basis",
    "DegeneratePatternError",
    "Error",
    "FormatError",
    "Geometry",
    "RankDeficientError",
    "SolverError",
    "apply_threshold",
    "compute_metrics",
    "direct_capture",
    "hadamard_basis",
    "plan_sampling",
    "random_basis",
    "read_basis",
    "read_exposure",
    "read_frames",
    "reconstruct_correlation",
    "reconstruct_cs",
    "reconstruct_exact",
    "reconstruct_sliding",
    "simulate",
    "solve_tv",
    "tv_objective",
    "upsample_scene",
    "write_basis",
    "write_exposure",
    "write_frames",
]
