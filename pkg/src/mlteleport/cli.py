"""Command-line entry point: ``mlteleport <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import io, selftest
from .noise import NoiseConfig, NoiseModel
from .optimizer import PARAM_NAMES, ProjectionError
from .protocol import FidelityGrid, ProtocolParams, Variant, average_fidelity, teleport
from .runner import (
    baseline_curve,
    compare_curves,
    reconstruct_params,
    run_sweep,
    table_curve,
    uniform_p_grid,
)


def _noise_args(p: argparse.ArgumentParser, default_noise="bitflip"):
    p.add_argument("--noise", default=default_noise, help="bitflip, phaseflip, depolarizing or ad")
    p.add_argument("--placement", default="alice", help="input, alice or both")


def cmd_simulate(args) -> int:
    noise = NoiseConfig(args.noise, args.p, args.placement)
    variant = Variant.parse(args.variant)
    if args.table:
        params = reconstruct_params(io.load_paper_table(noise.model), args.p)
        label = f"published {noise.model.value} table at p={args.p}"
    else:
        params = ProtocolParams.baseline(variant)
        label = f"{variant.value} baseline parameters"
    out = teleport(args.alpha, args.beta, params, noise)
    print(f"protocol: {label}")
    print(f"noise: {noise.model.value} p={noise.p} on {noise.placement.value}")
    print(f"input: alpha={args.alpha} beta={args.beta}")
    for i, (pi, fi) in enumerate(zip(out.probabilities, out.fidelities)):
        print(f"  outcome {i}: probability {pi:.9f}  fidelity {fi:.9f}")
    print(f"fidelity {out.total:.9f}")
    grid = FidelityGrid.midpoint(args.grid)
    print(f"average fidelity ({args.grid}x{args.grid} grid) {average_fidelity(params, noise, grid):.9f}")
    return 0


def _write_pairs(path: Path | None, header, rows):
    if path is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {path}")


def cmd_baseline(args) -> int:
    grid = FidelityGrid.midpoint(args.grid)
    curve = baseline_curve(args.noise, args.placement, uniform_p_grid(args.p_points), grid)
    _write_pairs(args.out, ["p", "f_baseline"], [[f"{p:.9g}", f"{f:.9g}"] for p, f in curve])
    return 0


def cmd_sweep(args) -> int:
    overrides = {
        "noise": args.noise, "placement": args.placement, "variant": args.variant,
        "p_points": args.p_points, "iterations": args.iterations, "sigma0": args.sigma0,
        "decay": args.decay, "explore_prob": args.explore_prob, "seed": args.seed,
        "reward_grid": args.reward_grid, "eval_grid": args.eval_grid,
        "warm_start": False if args.no_warm_start else None,
        "out": str(args.out) if args.out else None,
    }
    cfg = io.parse_config(args.config, overrides)
    out_dir = cfg.out_dir or io.default_out_dir()
    result = run_sweep(cfg)
    stem = out_dir / cfg.name
    paths = [io.write_csv(result, stem.with_name(cfg.name + ".csv")),
             io.write_manifest(result, stem.with_name(cfg.name + "_manifest.json"))]
    if result.table is not None:
        paths.append(io.write_table_csv(result.table, stem.with_name(cfg.name + "_table.csv")))
    if cfg.variant is Variant.FULL and cfg.noise is not NoiseModel.PHASE_FLIP:
        report = compare_curves(result, io.load_paper_table(cfg.noise))
        compare_csv = stem.with_name(cfg.name + "_compare.csv")
        compare_csv.write_text(report.to_csv(), encoding="utf-8")
        compare_txt = stem.with_name(cfg.name + "_compare.txt")
        compare_txt.write_text(report.to_text(), encoding="utf-8")
        paths += [compare_csv, compare_txt]
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_tables(args) -> int:
    table = io.load_paper_table(args.noise)
    if args.p is None:
        print(f"{'parameter':<10} {'p^3':>10} {'p^2':>10} {'p':>10} {'const':>10}")
        for name in PARAM_NAMES:
            print(f"{name:<10} " + " ".join(f"{c:10.5f}" for c in table[name]))
        return 0
    raw = table.raw_vector(args.p)
    try:
        params = reconstruct_params(table, args.p)
        from .optimizer import flatten

        projected = flatten(params)
    except ProjectionError as exc:
        print(f"projection failed: {exc}", file=sys.stderr)
        projected = np.full_like(raw, np.nan)
    print(f"{'parameter':<10} {'raw':>12} {'projected':>12}")
    for name, r, q in zip(PARAM_NAMES, raw, projected):
        print(f"{name:<10} {r:12.6f} {q:12.6f}")
    return 0


def cmd_reconstruct(args) -> int:
    model = NoiseModel.parse(args.noise)
    table = io.load_paper_table(model)
    grid = FidelityGrid.midpoint(args.grid)
    ps = uniform_p_grid(args.p_points)
    base = baseline_curve(model, args.placement, ps, grid)
    recon = table_curve(table, model, args.placement, ps, grid)
    rows = [[f"{p:.9g}", f"{fb:.9g}", f"{ft:.9g}"] for (p, fb), (_, ft) in zip(base, recon)]
    _write_pairs(args.out, ["p", "f_baseline", "f_table"], rows)
    return 0


def cmd_selftest(args) -> int:
    results = selftest.run(args.seed)
    for name, ok, detail in results:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else ""))
    failed = sum(not ok for _, ok, _ in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlteleport", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-point progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="teleport one input state")
    _noise_args(p)
    p.add_argument("--variant", default="bell")
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--table", action="store_true", help="use the published table parameters at p")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("baseline", help="Bell-protocol fidelity curve")
    _noise_args(p)
    p.add_argument("--p-points", type=int, default=50)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("sweep", help="optimize across noise strengths")
    p.add_argument("--config", type=Path)
    p.add_argument("--out", type=Path)
    p.add_argument("--noise")
    p.add_argument("--placement")
    p.add_argument("--variant")
    p.add_argument("--p-points", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--sigma0", type=float)
    p.add_argument("--decay", type=float)
    p.add_argument("--explore-prob", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--reward-grid", type=int)
    p.add_argument("--eval-grid", type=int)
    p.add_argument("--no-warm-start", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tables", help="list or evaluate a published coefficient table")
    p.add_argument("--noise", default="bitflip")
    p.add_argument("--p", type=float)
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("reconstruct", help="fidelity of the published-table protocol")
    _noise_args(p, default_noise="ad")
    p.add_argument("--p-points", type=int, default=50)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("selftest", help="run the built-in invariant checks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
