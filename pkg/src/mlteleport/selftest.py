"""Fast invariant checks across all modules, used by ``mlteleport selftest``."""

from __future__ import annotations

import itertools
from typing import Callable

import numpy as np

from . import qcore
from .noise import NoiseConfig, NoiseModel, NoisePlacement, apply_noise, kraus_for, lift_single
from .optimizer import N_PARAMS, OptimizerConfig, eval_cubic, fit_cubic, flatten, project_feasible
from .protocol import (
    FidelityGrid,
    ProtocolParams,
    Variant,
    average_fidelity,
    average_fidelity_direct,
    measurement_operators,
    rotated_bell_basis,
    su2,
    teleport,
)

Check = Callable[[np.random.Generator], str | None]
CHECKS: list[tuple[str, Check]] = []


def check(name: str):
    def register(fn: Check) -> Check:
        CHECKS.append((name, fn))
        return fn
    return register


@check("qcore: channels preserve trace and Hermiticity")
def _channel_trace(rng):
    for _ in range(50):
        rho = qcore.random_density_matrix(4, rng)
        u = qcore.random_unitary(8, rng)
        kraus = [u[:4, :4], u[4:, :4]]
        out = qcore.apply_channel(rho, kraus)
        if abs(np.trace(out) - 1) > 1e-8 or np.max(np.abs(out - out.conj().T)) > 1e-9:
            return "channel broke trace or Hermiticity"
    return None


@check("qcore: partial trace matches index contraction")
def _partial_trace(rng):
    for _ in range(20):
        rho = qcore.random_density_matrix(8, rng)
        t = rho.reshape([2] * 6)
        expected = np.zeros((2, 2), dtype=complex)
        for a, b in itertools.product(range(2), repeat=2):
            expected += t[a, b, :, a, b, :]
        if np.max(np.abs(qcore.partial_trace(rho, 3, [2]) - expected)) > 1e-10:
            return "partial trace mismatch"
    return None


@check("noise: Kraus completeness on a 101-point grid")
def _completeness(rng):
    for model in NoiseModel:
        for p in np.linspace(0, 1, 101):
            if qcore.completeness_defect(kraus_for(model, p)) > 1e-12:
                return f"{model.value} p={p} not trace preserving"
    return None


@check("noise: both-qubit noise equals two single-qubit lifts")
def _both_noise(rng):
    for model in NoiseModel:
        p = rng.uniform()
        rho = qcore.random_density_matrix(4, rng)
        both = apply_noise(rho, NoiseConfig(model, p, NoisePlacement.BOTH))
        single = kraus_for(model, p)
        seq = qcore.apply_channel(qcore.apply_channel(rho, lift_single(single, 0, 2)), lift_single(single, 1, 2))
        if np.max(np.abs(both - seq)) > 1e-12:
            return f"{model.value}: product noise differs from sequential lifts"
    return None


@check("protocol: noiseless Bell teleportation is exact")
def _noiseless(rng):
    bell = ProtocolParams.baseline()
    for _ in range(100):
        out = teleport(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi), bell, NoiseConfig("bitflip", 0.0))
        if abs(out.total - 1) > 1e-9 or np.max(np.abs(out.probabilities - 0.25)) > 1e-9:
            return f"noiseless fidelity {out.total}"
    return None


@check("protocol: measurement completeness and outcome normalization")
def _measurement(rng):
    for _ in range(100):
        ops = measurement_operators(rotated_bell_basis(su2(*rng.uniform(-np.pi, np.pi, 3))))
        if np.max(np.abs(ops.sum(axis=0) - np.eye(8))) > 1e-12:
            return "sum of measurement operators is not the identity"
    return None


@check("protocol: transfer-map average equals per-state average")
def _fast_path(rng):
    grid = FidelityGrid.midpoint(5)
    for placement in NoisePlacement:
        params = project_feasible(rng.normal(size=N_PARAMS))
        noise = NoiseConfig(NoiseModel.AMPLITUDE_DAMPING, rng.uniform(), placement)
        if abs(average_fidelity(params, noise, grid) - average_fidelity_direct(params, noise, grid)) > 1e-12:
            return f"fast and direct averages differ ({placement.value})"
    return None


@check("optimizer: projection feasibility and idempotence")
def _projection(rng):
    for _ in range(1000):
        params = project_feasible(rng.normal(size=N_PARAMS))
        if params.violations(atol=1e-10):
            return "; ".join(params.violations())
        again = project_feasible(flatten(params))
        if np.max(np.abs(flatten(again) - flatten(params))) > 1e-10:
            return "projection is not idempotent"
    return None


@check("optimizer: step-size schedule and cubic fit")
def _schedule(rng):
    cfg = OptimizerConfig()
    if abs(cfg.sigma_at(3000) / cfg.sigma0 - 0.999**3000) > 1e-12:
        return "sigma schedule drifted"
    ps = np.linspace(0, 1, 50)
    fit = fit_cubic(ps, eval_cubic((2, 0, -1, 0.5), ps))
    if np.max(np.abs(fit.coeffs - [2, 0, -1, 0.5])) > 1e-8:
        return f"cubic recovery failed: {fit.coeffs}"
    return None


@check("io: published tables load verbatim")
def _tables(rng):
    from .io import load_paper_table

    spots = [("bitflip", "phi", 3, 0.34890), ("ad", "a_Im", 0, 7.79834), ("depolarizing", "theta", 3, 0.15462)]
    for model, name, col, value in spots:
        if load_paper_table(model)[name][col] != value:
            return f"{model} {name} column {col} != {value}"
    return None


@check("protocol: Bell variant keeps baseline parameters")
def _variants(rng):
    for v in Variant:
        if ProtocolParams.baseline(v).violations():
            return f"baseline for {v.value} violates invariants"
    return None


def run(seed: int = 0) -> list[tuple[str, bool, str]]:
    results = []
    for name, fn in CHECKS:
        rng = np.random.default_rng(seed)
        try:
            problem = fn(rng)
        except Exception as exc:  # a crashing check is a failing check
            problem = f"{type(exc).__name__}: {exc}"
        results.append((name, problem is None, problem or ""))
    return results
