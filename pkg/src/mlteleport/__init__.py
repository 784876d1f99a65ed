"""Noisy single-qubit teleportation with adaptive, search-optimized protocols."""

__version__ = "0.1.0"

from .noise import NoiseConfig, NoiseModel, NoisePlacement, apply_noise, kraus_for
from .optimizer import (
    PARAM_NAMES,
    OptimizerConfig,
    finite_diff_gradient_ascent,
    fit_cubic,
    hill_climb,
    project_feasible,
)
from .protocol import (
    FidelityGrid,
    ProtocolParams,
    Variant,
    average_fidelity,
    teleport,
)
from .runner import SweepConfig, baseline_curve, compare_curves, run_sweep

__all__ = [
    "FidelityGrid",
    "NoiseConfig",
    "NoiseModel",
    "NoisePlacement",
    "OptimizerConfig",
    "PARAM_NAMES",
    "ProtocolParams",
    "SweepConfig",
    "Variant",
    "apply_noise",
    "average_fidelity",
    "baseline_curve",
    "compare_curves",
    "finite_diff_gradient_ascent",
    "fit_cubic",
    "hill_climb",
    "kraus_for",
    "project_feasible",
    "run_sweep",
    "teleport",
]
