"""
Noise-strength sweeps, cubic parameter tables and curve comparisons.

A sweep walks an ascending grid of noise strengths. At each point it
evaluates the Bell baseline, runs :func:`~mlteleport.optimizer.hill_climb`
from the better of the baseline and the previous optimum (warm start), and
records the optimized parameters. The optimum is anchored: if it does not
beat the baseline on the evaluation grid, the baseline is recorded instead,
so optimized fidelity never falls below the baseline.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from .noise import NoiseConfig, NoiseModel, NoisePlacement
from .optimizer import (
    N_PARAMS,
    PARAM_NAMES,
    OptimizerConfig,
    ProjectionError,
    SearchError,
    eval_cubic,
    fit_cubic,
    flatten,
    hill_climb,
    project_feasible,
)
from .protocol import FidelityGrid, ProtocolParams, Variant, average_fidelity

logger = logging.getLogger(__name__)

PRESETS: dict[str, tuple[NoiseModel, NoisePlacement]] = {
    "bitflip-alice": (NoiseModel.BIT_FLIP, NoisePlacement.ALICE),
    "bitflip-both": (NoiseModel.BIT_FLIP, NoisePlacement.BOTH),
    "ad-alice": (NoiseModel.AMPLITUDE_DAMPING, NoisePlacement.ALICE),
    "ad-both": (NoiseModel.AMPLITUDE_DAMPING, NoisePlacement.BOTH),
    "depolarizing-alice": (NoiseModel.DEPOLARIZING, NoisePlacement.ALICE),
    "depolarizing-both": (NoiseModel.DEPOLARIZING, NoisePlacement.BOTH),
}


def uniform_p_grid(n: int = 50) -> tuple[float, ...]:
    """``n`` evenly spaced noise strengths including both endpoints 0 and 1."""
    if n < 1:
        raise ValueError("p-grid needs at least one point")
    if n == 1:
        return (0.0,)
    return tuple(float(p) for p in np.linspace(0.0, 1.0, n))


@dataclass
class SweepConfig:
    noise: NoiseModel = NoiseModel.BIT_FLIP
    placement: NoisePlacement = NoisePlacement.ALICE
    variant: Variant = Variant.FULL
    p_grid: tuple[float, ...] = field(default_factory=uniform_p_grid)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    reward_grid: int = 24
    eval_grid: int = 64
    warm_start: bool = True
    out_dir: Path | None = None

    def __post_init__(self):
        self.noise = NoiseModel.parse(self.noise)
        self.placement = NoisePlacement.parse(self.placement)
        self.variant = Variant.parse(self.variant)
        grid = tuple(float(p) for p in self.p_grid)
        if not grid:
            raise ValueError("p_grid must not be empty")
        if any(b < a for a, b in zip(grid, grid[1:])):
            raise ValueError("p_grid must be sorted ascending")
        if grid[0] < 0 or grid[-1] > 1:
            raise ValueError("p_grid values must lie in [0, 1]")
        self.p_grid = grid
        if self.reward_grid < 1 or self.eval_grid < 1:
            raise ValueError("grid sizes must be positive")
        if self.out_dir is not None:
            self.out_dir = Path(self.out_dir)

    @property
    def seed(self) -> int:
        return self.optimizer.seed

    @property
    def name(self) -> str:
        return f"{self.noise.value}-{self.placement.value}-{self.variant.value}"


def preset_config(name: str, variant: Variant | str = Variant.FULL, **overrides) -> SweepConfig:
    """SweepConfig for one of the six named noise scenarios in :data:`PRESETS`."""
    try:
        model, placement = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    return SweepConfig(noise=model, placement=placement, variant=variant, **overrides)


@dataclass
class PointRecord:
    p: float
    f_baseline: float
    f_optimized: float
    params: np.ndarray
    iterations: int
    seed: int
    anchored: bool = False
    failed: bool = False
    error: str = ""


@dataclass
class CoefficientTable:
    """Cubic coefficients ``(p^3, p^2, p, 1)`` per parameter, in table row order."""

    rows: dict[str, np.ndarray]
    residuals: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if tuple(self.rows) != PARAM_NAMES:
            raise ValueError("coefficient table must list all 27 parameters in table order")
        self.rows = {k: np.asarray(v, dtype=float).reshape(4) for k, v in self.rows.items()}
        if not all(np.all(np.isfinite(v)) for v in self.rows.values()):
            raise ValueError("coefficient table contains non-finite values")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.rows[name]

    def raw_vector(self, p: float) -> np.ndarray:
        return np.array([eval_cubic(self.rows[name], p) for name in PARAM_NAMES])


@dataclass
class ScenarioResult:
    config: SweepConfig
    records: list[PointRecord]
    table: CoefficientTable | None
    metadata: dict = field(default_factory=dict)

    @property
    def ps(self) -> np.ndarray:
        return np.array([r.p for r in self.records])

    @property
    def baseline(self) -> np.ndarray:
        return np.array([r.f_baseline for r in self.records])

    @property
    def optimized(self) -> np.ndarray:
        return np.array([r.f_optimized for r in self.records])


def point_seed(seed: int, index: int) -> int:
    """Independent 63-bit seed for the ``index``-th point of a sweep seeded with ``seed``."""
    state = np.random.SeedSequence([int(seed), int(index)]).generate_state(1, np.uint64)[0]
    return int(state >> np.uint64(1))


def baseline_curve(model: NoiseModel | str, placement: NoisePlacement | str,
                   p_grid, grid: FidelityGrid) -> list[tuple[float, float]]:
    """Bell-protocol average fidelity at each ``p``."""
    bell = ProtocolParams.baseline(Variant.BELL)
    return [(float(p), average_fidelity(bell, NoiseConfig(model, p, placement), grid)) for p in p_grid]


def fit_table(ps, param_rows) -> CoefficientTable:
    """Fit a cubic to every parameter column of ``param_rows`` (shape ``(n, 27)``)."""
    param_rows = np.asarray(param_rows, dtype=float)
    rows, residuals = {}, {}
    for j, name in enumerate(PARAM_NAMES):
        fit = fit_cubic(ps, param_rows[:, j])
        rows[name] = fit.coeffs
        residuals[name] = fit.residual
    return CoefficientTable(rows, residuals)


def run_sweep(cfg: SweepConfig) -> ScenarioResult:
    started = _dt.datetime.now(_dt.timezone.utc)
    t0 = time.perf_counter()
    reward = FidelityGrid.midpoint(cfg.reward_grid)
    evaluation = FidelityGrid.midpoint(cfg.eval_grid)
    bell = ProtocolParams.baseline(Variant.BELL)
    start = ProtocolParams.baseline(cfg.variant)

    records = []
    previous = None
    for k, p in enumerate(cfg.p_grid):
        noise = NoiseConfig(cfg.noise, p, cfg.placement)
        seed = point_seed(cfg.seed, k)
        f_base = average_fidelity(bell, noise, evaluation)
        objective = partial(average_fidelity, noise=noise, grid=reward)

        init = start
        if cfg.warm_start and previous is not None and objective(previous) > objective(start):
            init = previous

        try:
            best, trace = hill_climb(objective, init, replace(cfg.optimizer, seed=seed))
        except SearchError as exc:
            logger.warning("%s: optimizer failed at p=%.4f: %s", cfg.name, p, exc)
            records.append(PointRecord(p, f_base, np.nan, np.full(N_PARAMS, np.nan),
                                       cfg.optimizer.iterations, seed, failed=True, error=str(exc)))
            continue

        f_opt = average_fidelity(best, noise, evaluation)
        anchored = f_opt < f_base
        if anchored:
            best, f_opt = start, average_fidelity(start, noise, evaluation)
        previous = best
        records.append(PointRecord(p, f_base, f_opt, flatten(best), len(trace), seed, anchored))
        logger.info("%s p=%.4f baseline=%.6f optimized=%.6f", cfg.name, p, f_base, f_opt)

    ok = [r for r in records if not r.failed]
    table = None
    if len({r.p for r in ok}) >= 4:
        table = fit_table([r.p for r in ok], [r.params for r in ok])

    metadata = {
        "scenario": cfg.name,
        "version": __version__,
        "seed": cfg.seed,
        "reward_grid": cfg.reward_grid,
        "eval_grid": cfg.eval_grid,
        "started": started.isoformat(),
        "finished": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "duration_s": time.perf_counter() - t0,
    }
    return ScenarioResult(cfg, records, table, metadata)


def run_many(configs: list[SweepConfig], max_workers: int = 1) -> list[ScenarioResult]:
    """Run independent sweeps, in worker processes when ``max_workers > 1``."""
    if max_workers <= 1:
        return [run_sweep(c) for c in configs]
    with ProcessPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(run_sweep, configs))


def reconstruct_params(table: CoefficientTable, p: float) -> ProtocolParams:
    """
    Evaluate every cubic at ``p`` and project back onto valid parameters.

    Raises
    ------
    ProjectionError
        With the offending ``p`` when the evaluated Kraus pair is singular.
    """
    try:
        return project_feasible(table.raw_vector(p), Variant.FULL)
    except ProjectionError as exc:
        raise ProjectionError(f"table reconstruction at p={p}: {exc}") from exc


@dataclass
class ComparisonRow:
    p: float
    baseline: float
    optimized: float
    reconstructed: float
    note: str = ""


@dataclass
class ComparisonReport:
    scenario: str
    rows: list[ComparisonRow]

    def summary(self) -> dict[str, float]:
        b = np.array([r.baseline for r in self.rows])
        o = np.array([r.optimized for r in self.rows])
        t = np.array([r.reconstructed for r in self.rows])
        return {
            "max_gain_optimized": float(np.nanmax(o - b)),
            "mean_gain_optimized": float(np.nanmean(o - b)),
            "max_gain_table": float(np.nanmax(t - b)) if np.any(np.isfinite(t)) else float("nan"),
            "mean_gain_table": float(np.nanmean(t - b)) if np.any(np.isfinite(t)) else float("nan"),
            "max_abs_table_vs_optimized": float(np.nanmax(np.abs(t - o))) if np.any(np.isfinite(t)) else float("nan"),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["p", "f_baseline", "f_optimized", "f_table", "note"])
        for r in self.rows:
            writer.writerow([f"{r.p:.9g}", f"{r.baseline:.9g}", f"{r.optimized:.9g}",
                             f"{r.reconstructed:.9g}", r.note])
        return buf.getvalue()

    def to_text(self) -> str:
        out = [f"scenario {self.scenario}",
               f"{'p':>8} {'baseline':>10} {'optimized':>10} {'table':>10}  note"]
        for r in self.rows:
            out.append(f"{r.p:8.4f} {r.baseline:10.6f} {r.optimized:10.6f} {r.reconstructed:10.6f}  {r.note}")
        for k, v in self.summary().items():
            out.append(f"{k}: {v:.6f}")
        return "\n".join(out) + "\n"


def compare_curves(result: ScenarioResult, table: CoefficientTable,
                   grid: FidelityGrid | None = None) -> ComparisonReport:
    """Baseline, freshly optimized and table-reconstructed fidelity at every sweep point."""
    cfg = result.config
    grid = FidelityGrid.midpoint(cfg.eval_grid) if grid is None else grid
    rows = []
    for rec in result.records:
        noise = NoiseConfig(cfg.noise, rec.p, cfg.placement)
        note = "optimizer failed" if rec.failed else ("anchored to baseline" if rec.anchored else "")
        try:
            f_table = average_fidelity(reconstruct_params(table, rec.p), noise, grid)
        except ProjectionError as exc:
            f_table = float("nan")
            note = "; ".join(filter(None, [note, str(exc)]))
        rows.append(ComparisonRow(rec.p, rec.f_baseline, rec.f_optimized, f_table, note))
    return ComparisonReport(cfg.name, rows)


def table_curve(table: CoefficientTable, model, placement, p_grid, grid: FidelityGrid) -> list[tuple[float, float]]:
    """Average fidelity of the table-reconstructed protocol at each ``p`` (nan where projection fails)."""
    out = []
    for p in p_grid:
        try:
            f = average_fidelity(reconstruct_params(table, p), NoiseConfig(model, p, placement), grid)
        except ProjectionError:
            f = float("nan")
        out.append((float(p), f))
    return out
