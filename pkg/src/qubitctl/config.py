"""Strict JSON configuration schema and report serialization.

Configurations are single JSON files.  Unknown keys are rejected and every
physical quantity (system, objective, horizon, grid) must be explicit;
defaults exist only for tolerances and budgets.  All floating-point output
uses full round-trip decimal precision so repeated runs are byte-identical.
"""
from __future__ import annotations

import json
import math
from typing import Any, Mapping, Sequence

import numpy as np

from . import mat2
from .dynamics import ControlGrid, HamiltonianPair, Trajectory, exceptional_control, min_time
from .landscape import F0Report, OptimizerConfig, SweepReport, SweepRun, Tolerances
from .objectives import (
    DensityMatrix,
    Gate,
    Objective,
    Observable,
    QuantumState,
    Transition,
    hadamard,
    not_gate,
    phase_gate,
)

__all__ = [
    "ConfigError",
    "load_config",
    "require_keys",
    "parse_matrix",
    "parse_state",
    "parse_objective",
    "parse_pair",
    "parse_control",
    "parse_optimizer",
    "parse_tolerances",
    "matrix_to_json",
    "dump_json",
    "trajectory_to_json",
    "trajectory_from_json",
    "f0_report_to_json",
    "sweep_csv_lines",
    "SWEEP_CSV_HEADER",
]


class ConfigError(ValueError):
    """Schema violation in a configuration file; CLI exit code 2."""


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("top-level config must be a JSON object")
    return data


def require_keys(
    spec: Mapping[str, Any], where: str, required: Sequence[str], optional: Sequence[str] = ()
) -> None:
    """Strict key check: everything required present, nothing unknown."""
    if not isinstance(spec, Mapping):
        raise ConfigError(f"{where} must be a JSON object")
    allowed = set(required) | set(optional)
    unknown = set(spec) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = [k for k in required if k not in spec]
    if missing:
        raise ConfigError(f"{where}: missing required keys {missing}")


def _real(x: Any, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{where} must be a real number")
    if not math.isfinite(float(x)):
        raise ConfigError(f"{where} must be finite")
    return float(x)


def _complex_pair(x: Any, where: str) -> complex:
    if not (isinstance(x, Sequence) and len(x) == 2):
        raise ConfigError(f"{where} must be a [re, im] pair")
    return complex(_real(x[0], where + "[re]"), _real(x[1], where + "[im]"))


def parse_matrix(spec: Any, where: str) -> mat2.Mat2:
    """A 2x2 matrix: Pauli coefficients {i,x,y,z} or explicit [re,im] entries."""
    if isinstance(spec, Mapping):
        require_keys(spec, where, [], ["i", "x", "y", "z"])
        if not spec:
            raise ConfigError(f"{where}: at least one Pauli coefficient is required")
        return mat2.pauli_compose(
            _real(spec.get("i", 0.0), where + ".i"),
            _real(spec.get("x", 0.0), where + ".x"),
            _real(spec.get("y", 0.0), where + ".y"),
            _real(spec.get("z", 0.0), where + ".z"),
        )
    if isinstance(spec, Sequence) and len(spec) == 2:
        rows = []
        for r, row in enumerate(spec):
            if not (isinstance(row, Sequence) and len(row) == 2):
                raise ConfigError(f"{where}: row {r} must have two entries")
            rows.append([_complex_pair(e, f"{where}[{r}]") for e in row])
        return np.array(rows, dtype=np.complex128)
    raise ConfigError(f"{where} must be a Pauli-coefficient object or a 2x2 entry list")


def parse_state(spec: Any, where: str) -> QuantumState:
    if not (isinstance(spec, Sequence) and len(spec) == 2):
        raise ConfigError(f"{where} must be two [re, im] amplitude pairs")
    amps = [_complex_pair(a, f"{where}[{k}]") for k, a in enumerate(spec)]
    try:
        return QuantumState(np.array(amps, dtype=np.complex128))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


_NAMED_GATES = {"hadamard": hadamard, "not": not_gate, "x": not_gate}


def _parse_gate_target(spec: Any, where: str) -> mat2.Mat2:
    if isinstance(spec, str):
        name = spec.lower()
        if name not in _NAMED_GATES:
            raise ConfigError(f"{where}: unknown gate name {spec!r}")
        return _NAMED_GATES[name]()
    if isinstance(spec, Mapping) and spec.get("name") == "phase":
        require_keys(spec, where, ["name", "phi"])
        return phase_gate(_real(spec["phi"], where + ".phi"))
    return parse_matrix(spec, where)


def parse_objective(spec: Any, where: str = "objective") -> Objective:
    require_keys(spec, where, ["type"], ["initial", "final", "rho0", "O", "W"])
    kind = spec["type"]
    try:
        if kind == "transition":
            require_keys(spec, where, ["type", "initial", "final"])
            return Transition(
                parse_state(spec["initial"], where + ".initial"),
                parse_state(spec["final"], where + ".final"),
            )
        if kind == "observable":
            require_keys(spec, where, ["type", "rho0", "O"])
            rho = DensityMatrix(parse_matrix(spec["rho0"], where + ".rho0"))
            return Observable(rho, parse_matrix(spec["O"], where + ".O"))
        if kind == "gate":
            require_keys(spec, where, ["type", "W"])
            return Gate(_parse_gate_target(spec["W"], where + ".W"))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}.type must be 'transition', 'observable' or 'gate'")


def parse_pair(spec: Any, where: str = "pair") -> HamiltonianPair:
    require_keys(spec, where, ["H0", "V"], ["traceless"])
    traceless = spec.get("traceless", False)
    if not isinstance(traceless, bool):
        raise ConfigError(f"{where}.traceless must be a boolean")
    try:
        return HamiltonianPair(
            parse_matrix(spec["H0"], where + ".H0"),
            parse_matrix(spec["V"], where + ".V"),
            traceless=traceless,
        )
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_control(
    spec: Any,
    pair: HamiltonianPair,
    where: str = "control",
    rng: np.random.Generator | None = None,
) -> ControlGrid:
    """Grid spec: horizon via T or T_multiplier, values via an explicit list,
    a constant (the string "f0" picks the exceptional control), or
    random_amplitude (uniform draws from the command seed)."""
    require_keys(
        spec, where, [], ["N", "T", "T_multiplier", "values", "constant", "random_amplitude"]
    )
    if ("T" in spec) == ("T_multiplier" in spec):
        raise ConfigError(f"{where}: exactly one of T and T_multiplier is required")
    horizon = (
        _real(spec["T"], where + ".T")
        if "T" in spec
        else _real(spec["T_multiplier"], where + ".T_multiplier") * min_time(pair)
    )
    sources = [k for k in ("values", "constant", "random_amplitude") if k in spec]
    if len(sources) != 1:
        raise ConfigError(
            f"{where}: exactly one of values, constant, random_amplitude is required"
        )
    if "values" in spec:
        raw = spec["values"]
        if not (isinstance(raw, Sequence) and raw):
            raise ConfigError(f"{where}.values must be a non-empty list")
        values = np.array([_real(x, where + ".values[]") for x in raw])
        if "N" in spec and int(spec["N"]) != values.size:
            raise ConfigError(f"{where}: N disagrees with len(values)")
    else:
        if "N" not in spec:
            raise ConfigError(f"{where}: N is required without explicit values")
        n = spec["N"]
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ConfigError(f"{where}.N must be a positive integer")
        if "constant" in spec:
            const = spec["constant"]
            if const == "f0":
                level = exceptional_control(pair)
            else:
                level = _real(const, where + ".constant")
            values = np.full(n, level)
        else:
            amp = _real(spec["random_amplitude"], where + ".random_amplitude")
            if rng is None:
                raise ConfigError(f"{where}: random_amplitude requires a seed")
            values = rng.uniform(-amp, amp, n)
    try:
        return ControlGrid(horizon, values)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_optimizer(spec: Any, where: str = "optimizer") -> OptimizerConfig:
    require_keys(
        spec,
        where,
        [],
        ["max_iters", "grad_tol", "armijo_c", "backtrack_factor", "initial_step", "direction"],
    )
    kwargs: dict[str, Any] = {}
    if "max_iters" in spec:
        if isinstance(spec["max_iters"], bool) or not isinstance(spec["max_iters"], int):
            raise ConfigError(f"{where}.max_iters must be an integer")
        kwargs["max_iters"] = spec["max_iters"]
    for key in ("grad_tol", "armijo_c", "backtrack_factor", "initial_step"):
        if key in spec:
            kwargs[key] = _real(spec[key], f"{where}.{key}")
    if "direction" in spec:
        kwargs["direction"] = spec["direction"]
    try:
        return OptimizerConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def parse_tolerances(spec: Any, where: str = "tolerances") -> Tolerances:
    require_keys(spec, where, [], ["grad_tol", "value_tol", "spec_tol"])
    kwargs = {k: _real(spec[k], f"{where}.{k}") for k in spec}
    return Tolerances(**kwargs)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _pyify(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays so json can emit them."""
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_pyify(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {k: _pyify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_pyify(x) for x in obj]
    return obj


def dump_json(data: Any) -> str:
    """Deterministic JSON text: sorted keys, round-trip float precision."""
    return json.dumps(_pyify(data), indent=2, sort_keys=True) + "\n"


def matrix_to_json(m: np.ndarray) -> list:
    """Entries as [re, im] pairs, row-major."""
    a = np.asarray(m, dtype=np.complex128)
    return [[[float(e.real), float(e.imag)] for e in row] for row in a]


def matrix_from_json(rows: Any, where: str = "matrix") -> mat2.Mat2:
    return parse_matrix(rows, where)


def trajectory_to_json(traj: Trajectory, total_time: float, objective_value: float | None) -> dict:
    times = np.linspace(0.0, total_time, traj.n_segments + 1)
    return {
        "times": [float(t) for t in times],
        "unitaries": [matrix_to_json(traj[k]) for k in range(traj.n_segments + 1)],
        "objective_value": objective_value,
    }


def trajectory_from_json(data: Mapping[str, Any]) -> Trajectory:
    units = [matrix_from_json(u, f"unitaries[{k}]") for k, u in enumerate(data["unitaries"])]
    return Trajectory(np.array(units))


def f0_report_to_json(report: F0Report) -> dict:
    return {
        "f0": report.f0,
        "time_scale": report.time_scale,
        "min_horizon": report.min_horizon,
        "horizon": report.horizon,
        "v": report.v,
        "v_z": report.v_z,
        "phi": report.phi,
        "l_sigma_z": report.l_sigma_z,
        "base_value": report.base_value,
        "grad_per_time": report.grad_per_time,
        "admissible": list(report.admissible),
        "i_values": list(report.i_values),
        "epsilons": list(report.epsilons),
        "measured": _pyify(report.measured),
        "predicted": _pyify(report.predicted),
        "verdict": report.verdict.value,
    }


SWEEP_CSV_HEADER = "pair_seed,start_seed,status,final_F,gap,grad_norm,hess_min,hess_max,kind"


def _csv_float(x: float | None) -> str:
    return repr(float(x)) if x is not None else "nan"


def sweep_csv_lines(report: SweepReport) -> list[str]:
    """One row per run, full round-trip precision, deterministic order."""
    lines = [SWEEP_CSV_HEADER]
    for run in report.runs:
        lines.append(
            ",".join(
                [
                    str(run.pair_seed),
                    str(run.start_seed),
                    run.status.value,
                    _csv_float(run.final_value),
                    _csv_float(run.gap_to_max),
                    _csv_float(run.grad_norm),
                    _csv_float(run.hess_min),
                    _csv_float(run.hess_max),
                    run.kind.value,
                ]
            )
        )
    return lines


def sweep_summary_json(report: SweepReport) -> dict:
    return {
        "seed": report.seed,
        "n_runs": report.n_runs,
        "kind_counts": dict(sorted(report.kind_counts.items())),
        "status_counts": dict(sorted(report.status_counts.items())),
        "trap_candidates": report.trap_candidates,
        "falsifications": [
            {
                "pair_seed": f.pair_seed,
                "start_seed": f.start_seed,
                "control": list(f.control),
                "total_time": f.total_time,
                "hessian_eigenvalues": list(f.hessian_eigenvalues),
            }
            for f in report.falsifications
        ],
    }


def run_record_to_json(run: SweepRun) -> dict:
    return {
        "pair_index": run.pair_index,
        "start_index": run.start_index,
        "pair_seed": run.pair_seed,
        "start_seed": run.start_seed,
        "status": run.status.value,
        "iterations": run.iterations,
        "escapes": run.escapes,
        "final_F": run.final_value,
        "gap": run.gap_to_max,
        "grad_norm": run.grad_norm,
        "hess_min": run.hess_min,
        "hess_max": run.hess_max,
        "kind": run.kind.value,
        "reverified": run.reverified,
    }
