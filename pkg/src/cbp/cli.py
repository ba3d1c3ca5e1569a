"""Command-line front end emitting reproducible CSV artifacts.

Every command reads a JSON config, writes CSVs into the output directory,
and records a manifest (config hash, seed, grid, tool version) next to
them. Given the same config and seed the CSVs are byte-identical across
runs; only the manifest timestamp differs.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import itertools
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, baseline, config, sim, structure, tactical
from .errors import CbpError, ConfigError, DegenerateBaseline
from .hjb import solve
from .model import PowerRate
from .multi import solve_multi


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _config_hash(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _write_manifest(out: Path, command: str, cfg: dict, grid, seed, outputs) -> None:
    manifest = {
        "command": command,
        "config_hash": _config_hash(cfg),
        "seed": seed,
        "grid": None if grid is None else {"dt": grid.dt, "n_actions": grid.n_actions},
        "version": __version__,
        "outputs": sorted(outputs),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _power_exponent(fn) -> str:
    return f"{fn.exponent:.9g}" if isinstance(fn, PowerRate) else ""


def _baseline_row(inst, grid):
    """Row `lambda,xi,cp,cu,T,gamma,nu,s_star,p_fs,p_cs,R` for one instance."""
    fixed = baseline.optimize_fixed_rate(inst, inst.horizon, n_actions=grid.n_actions)
    sol = structure.solve_auto(inst, grid)
    p_cs = float(sol.values[0, -1])
    try:
        r_value = f"{baseline.relative_value(inst, inst.horizon, grid):.9g}"
    except DegenerateBaseline:
        r_value = ""
    return [
        f"{inst.lam:.9g}",
        str(inst.xi),
        f"{inst.cost(0):.9g}",
        f"{inst.cost(inst.xi):.9g}",
        f"{inst.horizon:.9g}",
        _power_exponent(inst.f),
        _power_exponent(inst.r),
        f"{fixed.s_star:.9g}",
        f"{fixed.expected_profit:.9g}",
        f"{p_cs:.9g}",
        r_value,
    ]


def _default_bounds(cfg, inst, grid):
    if "bounds" in cfg:
        lo, hi = cfg["bounds"]
        return float(lo), float(hi)
    return 10 * grid.dt, 10 * inst.xi / inst.lam


def cmd_solve(cfg, args, out: Path):
    inst = config.instance_from_config(cfg)
    grid = config.grid_from_config(cfg, inst, args.dt, args.actions)
    sol = structure.solve_auto(inst, grid)
    sol.to_csv(out / "solution.csv")
    return grid, ["solution.csv"]


def cmd_structure(cfg, args, out: Path):
    inst = config.instance_from_config(cfg)
    grid = config.grid_from_config(cfg, inst, args.dt, args.actions)
    verdict = structure.check_bang_bang(inst)
    lambdas = [float(v) for v in cfg.get("lambdas", [inst.lam])]
    sols = [structure.solve_auto(inst.with_lambda(lam), grid) for lam in lambdas]
    report = structure.verify_structure(sols)
    report.to_csv(out / "structure.csv")
    (out / "structure.txt").write_text(
        f"bang_bang: {verdict.is_bang_bang} ({verdict.reason}, "
        f"worst_ratio_gap={verdict.worst_ratio_gap:.3g})\n" + report.to_text() + "\n",
        encoding="utf-8",
    )
    print(f"bang-bang: {verdict.is_bang_bang} ({verdict.reason})")
    print(f"structural checks passed: {report.all_passed}")
    if not report.all_passed:
        raise CbpError("structural verification failed; see structure.csv")
    return grid, ["structure.csv", "structure.txt"]


def cmd_tactical(cfg, args, out: Path):
    inst = config.instance_from_config(cfg)
    grid = config.grid_from_config(cfg, inst, args.dt, args.actions)
    bounds = _default_bounds(cfg, inst, grid)
    times, g_values = tactical.profit_curve(inst, bounds[1], grid)
    keep = times >= bounds[0] - 1e-12
    _write_csv(
        out / "curve.csv",
        ["T", "g"],
        zip(times[keep].tolist(), g_values[keep].tolist()),
    )
    result = tactical.optimize_interval(inst, bounds, grid)
    summary = {
        "t_star": result.t_star,
        "g_star": result.g_star,
        "boundary_hit": result.boundary_hit,
        "warning": result.warning,
    }
    if inst.cost.is_two_level:
        cmp_result = tactical.compare_integrated_sequential(inst, bounds, grid)
        summary.update(
            {
                "r_hat": cmp_result.r_hat,
                "t_sequential": cmp_result.t_sequential,
                "p_sequential": cmp_result.p_sequential,
            }
        )
    with open(out / "interval.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(
        f"t_star={result.t_star:.6g} g_star={result.g_star:.6g} "
        f"boundary_hit={result.boundary_hit}"
    )
    return grid, ["curve.csv", "interval.json"]


def cmd_baseline(cfg, args, out: Path):
    inst = config.instance_from_config(cfg)
    grid = config.grid_from_config(cfg, inst, args.dt, args.actions)
    header = ["lambda", "xi", "cp", "cu", "T", "gamma", "nu", "s_star", "p_fs", "p_cs", "R"]
    _write_csv(out / "baseline.csv", header, [_baseline_row(inst, grid)])
    return grid, ["baseline.csv"]


def cmd_simulate(cfg, args, out: Path):
    inst = config.instance_from_config(cfg)
    grid = config.grid_from_config(cfg, inst, args.dt, args.actions)
    prior = config.prior_from_config(cfg)
    n_opt = args.n_opt if args.n_opt is not None else int(cfg.get("n_opt", 0))
    reps = args.reps if args.reps is not None else int(cfg.get("reps", 2000))
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    oracle = cfg.get("oracle", "analytic")
    samples = sim.run_replications(
        inst, prior, n_opt=n_opt, reps=reps, seed=seed, grid=grid, oracle=oracle
    )
    estimate = sim.estimate_regret(
        inst, prior, n_opt=n_opt, reps=reps, seed=seed, grid=grid, samples=samples
    )
    _write_csv(
        out / "replications.csv",
        ["rep", "lambda_star", "oracle_value", "ce_profit"],
        (
            [k, samples.lam_stars[k], samples.oracle_values[k], samples.ce_profits[k]]
            for k in range(reps)
        ),
    )
    _write_csv(
        out / "summary.csv",
        ["mean_regret", "ci_halfwidth", "reps", "oracle_mean", "ce_mean"],
        [
            [
                estimate.mean_regret,
                estimate.ci_halfwidth,
                estimate.reps,
                estimate.oracle_mean,
                estimate.ce_mean,
            ]
        ],
    )
    print(
        f"regret={estimate.mean_regret:.4g}% +/- {estimate.ci_halfwidth:.4g}% "
        f"({estimate.reps} replications)"
    )
    return grid, ["replications.csv", "summary.csv"]


def cmd_multi(cfg, args, out: Path):
    inst = config.multi_from_config(cfg)
    grid = config.multi_grid_from_config(cfg, inst, args.dt, args.actions)
    sol = solve_multi(inst, grid)
    if inst.n_systems == 2:
        sol.to_csv(out / "multi.csv")
    else:
        n_sys = inst.n_systems
        header = (
            [f"x{i + 1}" for i in range(n_sys)]
            + ["n", "value"]
            + [f"s{i + 1}" for i in range(n_sys)]
        )
        rows = []
        for state in itertools.product(range(inst.xi + 1), repeat=n_sys):
            for n in range(sol.n_steps + 1):
                rows.append(
                    list(state)
                    + [n, float(sol.values[state][n])]
                    + [float(v) for v in sol.policy[state][n]]
                )
        _write_csv(out / "multi.csv", header, rows)
    return grid, ["multi.csv"]


def _sweep_row(job):
    """Worker: one sweep cell. Takes plain dicts so it can cross processes."""
    cfg, axes_values, metric, dt_override, actions_override = job
    inst = config.instance_from_config(cfg)
    grid = config.grid_from_config(cfg, inst, dt_override, actions_override)
    row = [_fmt(v) for v in axes_values]
    if metric == "baseline":
        row += _baseline_row(inst, grid)
    else:
        bounds = _default_bounds(cfg, inst, grid)
        cmp_result = tactical.compare_integrated_sequential(inst, bounds, grid)
        row += [
            f"{cmp_result.r_hat:.9g}",
            f"{cmp_result.t_integrated:.9g}",
            f"{cmp_result.t_sequential:.9g}",
            f"{cmp_result.p_integrated:.9g}",
            f"{cmp_result.p_sequential:.9g}",
        ]
    return row


def cmd_sweep(cfg, args, out: Path):
    axes = config.sweep_axes_from_config(cfg)
    metric = cfg.get("metric", "baseline")
    if metric not in ("baseline", "tactical"):
        raise ConfigError(f"unknown sweep metric '{metric}'")
    axis_names = list(axes.keys())
    if metric == "baseline":
        header = axis_names + [
            "lambda", "xi", "cp", "cu", "T", "gamma", "nu", "s_star", "p_fs", "p_cs", "R",
        ]
    else:
        header = axis_names + ["r_hat", "t_integrated", "t_sequential",
                               "p_integrated", "p_sequential"]

    ckpt_dir = out / "checkpoints"
    ckpt_dir.mkdir(parents=True, exist_ok=True)
    jobs = []
    cells = []
    for combo in itertools.product(*(axes[name] for name in axis_names)):
        cell_cfg = cfg
        for name, value in zip(axis_names, combo):
            cell_cfg = config.apply_axis(cell_cfg, name, value)
        cell_id = _config_hash(
            {"axes": dict(zip(axis_names, combo)), "cfg": cell_cfg}
        )[:16]
        cells.append((combo, cell_id))
        ckpt = ckpt_dir / f"{cell_id}.json"
        if not ckpt.exists():
            jobs.append(
                (cell_id, (cell_cfg, list(combo), metric, args.dt, args.actions))
            )

    workers = int(cfg.get("workers", min(os.cpu_count() or 1, 8)))
    if jobs:
        if workers > 1 and len(jobs) > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
                rows = pool.map(_sweep_row, [job for _, job in jobs])
                for (cell_id, _), row in zip(jobs, rows):
                    _checkpoint(ckpt_dir, cell_id, row)
        else:
            for cell_id, job in jobs:
                _checkpoint(ckpt_dir, cell_id, _sweep_row(job))

    rows = []
    for _, cell_id in cells:
        with open(ckpt_dir / f"{cell_id}.json", "r", encoding="utf-8") as fh:
            rows.append(json.load(fh)["row"])
    _write_csv(out / "sweep.csv", header, rows)
    print(f"sweep: {len(rows)} instances -> sweep.csv")
    return None, ["sweep.csv"]


def _checkpoint(ckpt_dir: Path, cell_id: str, row) -> None:
    path = ckpt_dir / f"{cell_id}.json"
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump({"row": row}, fh)
    tmp.replace(path)


_COMMANDS = {
    "solve": cmd_solve,
    "structure": cmd_structure,
    "tactical": cmd_tactical,
    "baseline": cmd_baseline,
    "simulate": cmd_simulate,
    "multi": cmd_multi,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cbp",
        description="Condition-based production policies: solve, optimize, simulate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("solve", "solve the operational policy and emit the value/policy grid"),
        ("structure", "bang-bang verdict and structural checks on solutions"),
        ("tactical", "optimize the maintenance interval; emit the g(T) curve"),
        ("baseline", "optimal fixed-rate policy and relative value metric"),
        ("simulate", "Monte Carlo regret of the certainty-equivalent policy"),
        ("multi", "solve the joint policy for a fleet sharing a demand rate"),
        ("sweep", "factorial sweep over config axes with checkpointing"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="RNG seed")
        p.add_argument("--reps", type=int, default=None, help="simulation replications")
        p.add_argument("--dt", type=float, default=None, help="time step override")
        p.add_argument(
            "--actions", type=int, default=None, help="action grid size override"
        )
        p.add_argument(
            "--n-opt", type=int, default=None, help="re-optimizations (simulate)"
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config.load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        grid, outputs = _COMMANDS[args.command](cfg, args, out)
        seed = args.seed if args.seed is not None else cfg.get("seed")
        _write_manifest(out, args.command, cfg, grid, seed, outputs)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CbpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
