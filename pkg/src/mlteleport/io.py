"""
Configuration files, CSV output, run manifests and the published tables.

Config files are flat ``key = value`` text; ``#`` starts a comment. Keys:

    noise, placement, variant, p_points, iterations, sigma0, decay,
    explore_prob, seed, reward_grid, eval_grid, warm_start, out

Command-line overrides are applied on top of the file.
"""

from __future__ import annotations

import csv
import json
import os
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from . import __version__
from .noise import NoiseModel, NoisePlacement
from .optimizer import PARAM_NAMES, OptimizerConfig
from .protocol import Variant
from .runner import CoefficientTable, ScenarioResult, SweepConfig, uniform_p_grid

OUT_DIR_ENV = "MLTELEPORT_OUT"

CSV_HEADER = ("noise", "placement", "variant", "p", "f_baseline", "f_optimized", "seed", "iterations") + PARAM_NAMES

CONFIG_KEYS = (
    "noise", "placement", "variant", "p_points", "iterations", "sigma0", "decay",
    "explore_prob", "seed", "reward_grid", "eval_grid", "warm_start", "out",
)


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, "results"))


def read_config_file(path: str | os.PathLike) -> dict[str, str]:
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key = value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = value
    return values


def _as_bool(key: str, value) -> bool:
    if isinstance(value, bool):
        return value
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(key, f"expected a boolean, got {value!r}")


def _number(key: str, value, kind=float, lo=None, hi=None, lo_open=False, hi_open=False):
    try:
        x = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected {kind.__name__}, got {value!r}") from None
    if lo is not None and (x < lo or (lo_open and x == lo)):
        raise ConfigError(key, f"value {x} out of range")
    if hi is not None and (x > hi or (hi_open and x == hi)):
        raise ConfigError(key, f"value {x} out of range")
    return x


def parse_config(path: str | os.PathLike | None = None,
                 overrides: Mapping[str, object] | None = None) -> SweepConfig:
    """
    Build a validated :class:`SweepConfig` from an optional file plus overrides.

    Defaults: bit-flip noise on Alice's half, fully adaptive protocol,
    50 noise strengths, 3000 iterations, decay 0.999, seed 0.

    Raises
    ------
    ConfigError
        Naming the offending key for unknown keys and out-of-range values.
    """
    values: dict[str, object] = {}
    if path is not None:
        values.update(read_config_file(path))
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    unknown = sorted(set(values) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(unknown[0], "unknown configuration key")

    defaults = OptimizerConfig()
    opt = dict(
        iterations=_number("iterations", values.get("iterations", defaults.iterations), int, lo=0),
        sigma0=_number("sigma0", values.get("sigma0", defaults.sigma0), lo=0, lo_open=True),
        decay=_number("decay", values.get("decay", defaults.decay), lo=0, hi=1, lo_open=True),
        explore_prob=_number("explore_prob", values.get("explore_prob", defaults.explore_prob),
                             lo=0, hi=1, hi_open=True),
        seed=_number("seed", values.get("seed", 0), int, lo=0, hi=2**64 - 1),
    )
    kwargs = dict(
        p_grid=uniform_p_grid(_number("p_points", values.get("p_points", 50), int, lo=1)),
        reward_grid=_number("reward_grid", values.get("reward_grid", 24), int, lo=1),
        eval_grid=_number("eval_grid", values.get("eval_grid", 64), int, lo=1),
        warm_start=_as_bool("warm_start", values.get("warm_start", True)),
        out_dir=Path(str(values["out"])) if "out" in values else None,
    )
    for key, parser, default in (("noise", NoiseModel.parse, "bitflip"),
                                 ("placement", NoisePlacement.parse, "alice"),
                                 ("variant", Variant.parse, "full")):
        try:
            kwargs[key] = parser(values.get(key, default))
        except ValueError as exc:
            raise ConfigError(key, str(exc)) from None
    return SweepConfig(optimizer=OptimizerConfig(**opt), **kwargs)


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def result_rows(result: ScenarioResult) -> list[list[str]]:
    cfg = result.config
    rows = []
    for r in result.records:
        rows.append(
            [cfg.noise.value, cfg.placement.value, cfg.variant.value, _fmt(r.p), _fmt(r.f_baseline),
             _fmt(r.f_optimized), str(r.seed), str(r.iterations)]
            + [_fmt(v) for v in r.params]
        )
    return rows


def write_csv(result: ScenarioResult, path: str | os.PathLike) -> Path:
    """One row per sweep point; 8 leading columns then the 27 parameters."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            writer.writerows(result_rows(result))
    except OSError as exc:
        raise OSError(f"failed to write {path}: {exc}") from exc
    return path


def read_csv(path: str | os.PathLike) -> list[dict[str, object]]:
    """Read a sweep CSV back; numeric columns become floats/ints."""
    out = []
    with Path(path).open(encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            rec: dict[str, object] = {k: row[k] for k in ("noise", "placement", "variant")}
            rec["seed"] = int(row["seed"])
            rec["iterations"] = int(row["iterations"])
            for k in ("p", "f_baseline", "f_optimized"):
                rec[k] = float(row[k])
            rec["params"] = np.array([float(row[k]) for k in PARAM_NAMES])
            out.append(rec)
    return out


def write_table_csv(table: CoefficientTable, path: str | os.PathLike) -> Path:
    """Coefficient table in the published row order, with fit residuals when known."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["parameter", "p3", "p2", "p1", "p0", "residual"])
        for name in PARAM_NAMES:
            res = table.residuals.get(name)
            writer.writerow([name, *(_fmt(c) for c in table[name]), "" if res is None else _fmt(res)])
    return path


def write_manifest(result: ScenarioResult, path: str | os.PathLike) -> Path:
    cfg = result.config
    manifest = {
        "version": __version__,
        "scenario": cfg.name,
        "config": {
            "noise": cfg.noise.value,
            "placement": cfg.placement.value,
            "variant": cfg.variant.value,
            "p_points": len(cfg.p_grid),
            "iterations": cfg.optimizer.iterations,
            "sigma0": cfg.optimizer.sigma0,
            "decay": cfg.optimizer.decay,
            "explore_prob": cfg.optimizer.explore_prob,
            "reward_grid": cfg.reward_grid,
            "eval_grid": cfg.eval_grid,
            "warm_start": cfg.warm_start,
        },
        "seed": cfg.seed,
        "grid_sizes": {"reward": [cfg.reward_grid, cfg.reward_grid], "eval": [cfg.eval_grid, cfg.eval_grid]},
        "failed_points": [r.p for r in result.records if r.failed],
        "anchored_points": [r.p for r in result.records if r.anchored],
        "started": result.metadata.get("started"),
        "finished": result.metadata.get("finished"),
        "duration_s": result.metadata.get("duration_s"),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


_PUBLISHED = {NoiseModel.BIT_FLIP: "bitflip", NoiseModel.AMPLITUDE_DAMPING: "ad",
              NoiseModel.DEPOLARIZING: "depolarizing"}


def load_paper_table(model: NoiseModel | str) -> CoefficientTable:
    """Published cubic coefficients for the fully adaptive protocol under ``model``."""
    model = NoiseModel.parse(model)
    if model not in _PUBLISHED:
        raise ValueError(f"no published table for {model.value} noise")
    key = _PUBLISHED[model]
    text = resources.files("mlteleport").joinpath("data/paper_tables.csv").read_text(encoding="utf-8")
    rows = {}
    for row in csv.DictReader(text.splitlines()):
        if row["noise"] == key:
            rows[row["parameter"]] = [float(row[c]) for c in ("p3", "p2", "p1", "p0")]
    return CoefficientTable(rows)
