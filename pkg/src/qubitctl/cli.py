"""Command-line harness.

Subcommands: propagate, gradcheck, optimize, sweep, f0, rank, slice.
Every subcommand reads one strict-schema JSON config (--config), optionally
writes machine-readable output (--out) and accepts a --seed override where
randomness is involved.  Outputs are deterministic given the config and
seed: repeated runs are byte-identical.

Exit codes: 0 success (and, for sweeps, no trap candidates), 1 verification
failure, 2 config error, 3 hypothesis violation.
"""
from __future__ import annotations

import argparse
import sys
from typing import Sequence

import numpy as np

from . import checks, config as cfgmod, kernels
from .config import ConfigError, dump_json, load_config, require_keys
from .dynamics import exceptional_control, min_time, propagate
from .landscape import (
    HypothesisViolation,
    OptimizerConfig,
    SweepConfig,
    ascend,
    cos4_variation,
    f0_second_order_report,
    rank_profile,
    step_variation,
    sweep,
)
from .objectives import objective_value, value

__all__ = ["main"]

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_CONFIG = 2
EXIT_HYPOTHESIS = 3


def _write(path: str | None, text: str) -> None:
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _seeded_rng(args_seed: int | None, cfg_seed) -> tuple[int, np.random.Generator]:
    seed = args_seed if args_seed is not None else int(cfg_seed or 0)
    return seed, np.random.default_rng(seed)


def cmd_propagate(cfg: dict, out: str | None, seed: int | None) -> int:
    require_keys(cfg, "config", ["pair", "control"], ["objective", "seed"])
    pair = cfgmod.parse_pair(cfg["pair"])
    _, rng = _seeded_rng(seed, cfg.get("seed"))
    control = cfgmod.parse_control(cfg["control"], pair, rng=rng)
    traj = propagate(pair, control)
    score = None
    if "objective" in cfg:
        score = value(cfgmod.parse_objective(cfg["objective"]), traj.final)
    _write(out, dump_json(cfgmod.trajectory_to_json(traj, control.total_time, score)))
    u = traj.final
    print(f"propagated N={control.n} segments over T={control.total_time!r}")
    for row in range(2):
        print("  U_T " + "  ".join(f"{u[row, col]:+.12f}" for col in range(2)))
    if score is not None:
        print(f"objective value: {score!r}")
    return EXIT_OK


def cmd_gradcheck(cfg: dict, out: str | None, seed: int | None) -> int:
    require_keys(
        cfg,
        "config",
        [],
        [
            "instances",
            "n_segments",
            "seed",
            "threshold",
            "fd_step",
            "families",
            "t_multiplier",
            "comm_floor",
            "amplitude",
        ],
    )
    seed_val, _ = _seeded_rng(seed, cfg.get("seed"))
    families = cfg.get("families", list(checks.FAMILIES))
    if not (
        isinstance(families, list) and families and all(isinstance(f, str) for f in families)
    ):
        raise ConfigError("families must be a non-empty list of family names")
    try:
        report = checks.gradcheck(
            seed=seed_val,
            instances=int(cfg.get("instances", 50)),
            n_segments=int(cfg.get("n_segments", 32)),
            families=families,
            threshold=float(cfg.get("threshold", 1e-6)),
            fd_step=float(cfg.get("fd_step", 1e-5)),
            t_multiplier=float(cfg.get("t_multiplier", 1.5)),
            comm_floor=float(cfg.get("comm_floor", 1e-3)),
            amplitude=float(cfg.get("amplitude", 1.0)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _write(out, dump_json(report))
    for family, entry in report["per_family"].items():
        print(f"{family}: max rel err {entry['max_rel_err']!r} over {entry['instances']} instances")
    print(f"gradcheck {'PASS' if report['passed'] else 'FAIL'} "
          f"(max {report['max_rel_err']!r}, threshold {report['threshold']!r})")
    return EXIT_OK if report["passed"] else EXIT_VERIFICATION


def cmd_optimize(cfg: dict, out: str | None, seed: int | None) -> int:
    require_keys(cfg, "config", ["pair", "objective", "control"], ["optimizer", "seed"])
    pair = cfgmod.parse_pair(cfg["pair"])
    obj = cfgmod.parse_objective(cfg["objective"])
    _, rng = _seeded_rng(seed, cfg.get("seed"))
    control = cfgmod.parse_control(cfg["control"], pair, rng=rng)
    opt = cfgmod.parse_optimizer(cfg.get("optimizer", {}))
    record = ascend(obj, pair, control, opt)
    payload = {
        "status": record.status.value,
        "iterations": record.iterations,
        "final_value": float(record.trace[-1]),
        "grad_norm": record.grad_norm,
        "trace": [float(x) for x in record.trace],
        "initial_control": [float(x) for x in record.initial],
        "final_control": [float(x) for x in record.final],
        "total_time": control.total_time,
    }
    _write(out, dump_json(payload))
    print(
        f"{opt.direction} {record.status.value} after {record.iterations} iterations: "
        f"F={float(record.trace[-1])!r}, grad_inf={record.grad_norm!r}"
    )
    return EXIT_OK


def cmd_sweep(cfg: dict, out: str | None, seed: int | None) -> int:
    require_keys(
        cfg,
        "config",
        ["objective", "pairs", "starts_per_pair", "control"],
        [
            "optimizer",
            "tolerances",
            "seed",
            "start_amplitude",
            "max_escapes",
            "escape_step",
            "workers",
        ],
    )
    require_keys(cfg["pairs"], "pairs", ["count"], ["traceless", "comm_floor"])
    require_keys(cfg["control"], "control", ["N", "T_multiplier"])
    obj = cfgmod.parse_objective(cfg["objective"])
    seed_val, _ = _seeded_rng(seed, cfg.get("seed"))
    try:
        sweep_cfg = SweepConfig(
            objective=obj,
            n_pairs=int(cfg["pairs"]["count"]),
            starts_per_pair=int(cfg["starts_per_pair"]),
            n_segments=int(cfg["control"]["N"]),
            t_multiplier=float(cfg["control"]["T_multiplier"]),
            seed=seed_val,
            traceless=bool(cfg["pairs"].get("traceless", True)),
            comm_floor=float(cfg["pairs"].get("comm_floor", 1e-3)),
            start_amplitude=float(cfg.get("start_amplitude", 1.0)),
            optimizer=cfgmod.parse_optimizer(cfg.get("optimizer", {})),
            tolerances=cfgmod.parse_tolerances(cfg.get("tolerances", {})),
            max_escapes=int(cfg.get("max_escapes", 4)),
            escape_step=float(cfg.get("escape_step", 1e-2)),
            workers=int(cfg.get("workers", 1)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report = sweep(sweep_cfg)
    if out is not None:
        _write(out + ".csv", "\n".join(cfgmod.sweep_csv_lines(report)) + "\n")
        _write(out + ".json", dump_json(cfgmod.sweep_summary_json(report)))
    print(f"sweep finished: {report.n_runs} runs (seed {report.seed})")
    for kind, count in sorted(report.kind_counts.items()):
        print(f"  {kind}: {count}")
    for status, count in sorted(report.status_counts.items()):
        print(f"  status {status}: {count}")
    if report.trap_candidates:
        print(f"TRAP CANDIDATES: {report.trap_candidates} (see falsification records)")
        return EXIT_VERIFICATION
    print("no trap candidates")
    return EXIT_OK


def cmd_f0(cfg: dict, out: str | None, seed: int | None) -> int:
    require_keys(
        cfg, "config", ["pair", "objective"], ["epsilons", "n_segments", "t_multiplier"]
    )
    pair = cfgmod.parse_pair(cfg["pair"])
    obj = cfgmod.parse_objective(cfg["objective"])
    eps = cfg.get("epsilons", [1e-2, 1e-3, 1e-4])
    if not (isinstance(eps, list) and eps):
        raise ConfigError("epsilons must be a non-empty list of reals")
    report = f0_second_order_report(
        pair,
        obj,
        [float(e) for e in eps],
        n_segments=int(cfg.get("n_segments", 2048)),
        t_multiplier=float(cfg.get("t_multiplier", 1.0)),
    )
    _write(out, dump_json(cfgmod.f0_report_to_json(report)))
    print(f"f0 = {report.f0!r}")
    print(f"T_min = {report.min_horizon!r}, horizon = {report.horizon!r}, "
          f"time_scale = {report.time_scale!r}")
    print(f"v = {report.v!r}, v_z = {report.v_z!r}, L(sigma_z) = {report.l_sigma_z!r}")
    print(f"I1 = {report.i_values[0]!r}, I2 = {report.i_values[1]!r}, "
          f"admissible = {report.admissible}")
    for j, e in enumerate(report.epsilons):
        print(
            f"  eps={e!r}: D1={float(report.measured[0, j])!r}"
            f" (pred {float(report.predicted[0, j])!r}),"
            f" D2={float(report.measured[1, j])!r}"
            f" (pred {float(report.predicted[1, j])!r})"
        )
    print(f"verdict: {report.verdict.value}")
    return EXIT_OK


def cmd_rank(cfg: dict, out: str | None, seed: int | None) -> int:
    require_keys(cfg, "config", ["pair", "control"], ["seed"])
    pair = cfgmod.parse_pair(cfg["pair"])
    _, rng = _seeded_rng(seed, cfg.get("seed"))
    control = cfgmod.parse_control(cfg["control"], pair, rng=rng)
    ranks = rank_profile(pair, control)
    f0 = exceptional_control(pair)
    payload = {
        "f0": f0,
        "node_times": [float(t) for t in control.node_times()],
        "ranks": ranks,
    }
    _write(out, dump_json(payload))
    print(f"f0 = {f0!r}")
    print("ranks per node:", " ".join(str(r) for r in ranks))
    return EXIT_OK


def _slice_directions(spec, pair, control, rng) -> tuple[np.ndarray, np.ndarray]:
    require_keys(spec, "directions", ["mode"], ["vectors"])
    mode = spec["mode"]
    if mode == "random":
        d1 = rng.normal(size=control.n)
        d2 = rng.normal(size=control.n)
        return d1 / np.linalg.norm(d1), d2 / np.linalg.norm(d2)
    if mode == "f0_variations":
        from .dynamics import canonical_frame

        frame = canonical_frame(pair)
        d1 = step_variation().scaled_to(frame.time_scale).sample(control.n, control.total_time)
        d2 = cos4_variation().scaled_to(frame.time_scale).sample(control.n, control.total_time)
        return d1, d2
    if mode == "explicit":
        vectors = spec.get("vectors")
        if not (isinstance(vectors, list) and len(vectors) == 2):
            raise ConfigError("directions.vectors must hold exactly two vectors")
        d1, d2 = (np.asarray(v, dtype=np.float64) for v in vectors)
        if d1.shape != (control.n,) or d2.shape != (control.n,):
            raise ConfigError("direction vectors must match the control length")
        return d1, d2
    raise ConfigError("directions.mode must be 'random', 'f0_variations' or 'explicit'")


def cmd_slice(cfg: dict, out: str | None, seed: int | None) -> int:
    require_keys(
        cfg,
        "config",
        ["pair", "objective", "control", "directions", "extent", "resolution"],
        ["seed"],
    )
    pair = cfgmod.parse_pair(cfg["pair"])
    obj = cfgmod.parse_objective(cfg["objective"])
    _, rng = _seeded_rng(seed, cfg.get("seed"))
    control = cfgmod.parse_control(cfg["control"], pair, rng=rng)
    extent = float(cfg["extent"])
    resolution = cfg["resolution"]
    if isinstance(resolution, bool) or not isinstance(resolution, int):
        raise ConfigError("resolution must be an integer")
    if resolution < 3 or resolution % 2 == 0:
        raise ConfigError("resolution must be an odd integer >= 3 so the origin is on the grid")
    if extent <= 0.0:
        raise ConfigError("extent must be positive")
    d1, d2 = _slice_directions(cfg["directions"], pair, control, rng)

    offsets = np.linspace(-extent, extent, resolution)
    grid = np.empty((resolution, resolution))
    for i, a in enumerate(offsets):
        for j, b in enumerate(offsets):
            vals = control.values + a * d1 + b * d2
            grid[i, j] = objective_value(obj, pair, control.with_values(vals))
    origin = value(obj, propagate(pair, control).final)
    center = resolution // 2
    if abs(grid[center, center] - origin) > 1e-12:
        print(
            f"slice origin mismatch: grid {grid[center, center]!r} vs direct {origin!r}",
            file=sys.stderr,
        )
        return EXIT_VERIFICATION
    header = f"# qubitctl-slice resolution={resolution} extent={extent!r} origin_value={origin!r}"
    lines = [header] + [" ".join(repr(float(x)) for x in row) for row in grid]
    _write(out, "\n".join(lines) + "\n")
    print(header.lstrip("# "))
    print(f"grid range: [{float(grid.min())!r}, {float(grid.max())!r}]")
    return EXIT_OK


_COMMANDS = {
    "propagate": (cmd_propagate, "propagate a control and dump node unitaries"),
    "gradcheck": (cmd_gradcheck, "verify analytic gradients against finite differences"),
    "optimize": (cmd_optimize, "run one gradient ascent/descent from a config"),
    "sweep": (cmd_sweep, "Monte-Carlo trap sweep; exit 0 iff no trap candidates"),
    "f0": (cmd_f0, "second-order analysis at the exceptional control"),
    "rank": (cmd_rank, "rank profile of the nested-commutator family along a control"),
    "slice": (cmd_slice, "2-D landscape slice for external plotting"),
}

_SCHEMA_NOTES = """\
config schema (strict JSON; unknown keys rejected):
  pair:      {"H0": MAT, "V": MAT, "traceless": bool?}
  MAT:       {"i": r, "x": r, "y": r, "z": r} Pauli coefficients, or 2x2 [re, im] entries
  objective: {"type": "transition", "initial": STATE, "final": STATE}
             {"type": "observable", "rho0": MAT, "O": MAT}
             {"type": "gate", "W": "hadamard" | "not" | {"name": "phase", "phi": r} | entries}
  STATE:     two [re, im] amplitude pairs
  control:   {"N": int?, "T": r | "T_multiplier": r,
              "values": [r, ...] | "constant": r | "f0" | "random_amplitude": r}
  optimizer: {"max_iters", "grad_tol", "armijo_c", "backtrack_factor",
              "initial_step", "direction": "ascend" | "descend"}  (all optional)

per-command keys:
  propagate: pair, control, objective?, seed?
  gradcheck: instances?, n_segments?, seed?, threshold?, fd_step?, families?,
             t_multiplier?, comm_floor?, amplitude?
  optimize:  pair, objective, control, optimizer?, seed?
  sweep:     objective, pairs{count, traceless?, comm_floor?}, starts_per_pair,
             control{N, T_multiplier}, optimizer?, tolerances?, seed?,
             start_amplitude?, max_escapes?, escape_step?, workers?
  f0:        pair, objective, epsilons?, n_segments?, t_multiplier?
  rank:      pair, control, seed?
  slice:     pair, objective, control, directions{mode, vectors?}, extent,
             resolution (odd), seed?

exit codes: 0 success / no traps, 1 verification failure, 2 config error,
3 hypothesis violation.
"""


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="qubitctl",
        description="Coherent two-level control with trap-free landscape certification "
        f"(kernel backend: {kernels.backend()})",
        epilog=_SCHEMA_NOTES,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in _COMMANDS.items():
        p = sub.add_parser(
            name,
            help=help_text,
            epilog=_SCHEMA_NOTES,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--out", default=None, help="output path (sweep writes OUT.csv and OUT.json)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
    args = parser.parse_args(argv)

    handler = _COMMANDS[args.command][0]
    try:
        cfg = load_config(args.config)
        return handler(cfg, args.out, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HypothesisViolation as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except ArithmeticError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION


if __name__ == "__main__":
    sys.exit(main())
