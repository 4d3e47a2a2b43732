"""Finite-difference verification of the analytic derivatives.

These routines drive the gradcheck CLI command and the property suites:
every analytic gradient and first-variation functional in the package is
compared against central differences on randomly drawn instances.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from . import mat2
from .dynamics import ControlGrid, HamiltonianPair, min_time
from .landscape import random_control, random_pair
from .objectives import (
    DensityMatrix,
    Gate,
    Objective,
    Observable,
    QuantumState,
    Transition,
    gradient,
    l_functional,
    objective_value,
    value,
)

__all__ = [
    "FAMILIES",
    "random_state",
    "random_unitary",
    "random_hermitian",
    "random_density",
    "random_objective",
    "fd_gradient",
    "gradient_rel_error",
    "l_functional_rel_error",
    "gradcheck",
]

FAMILIES = ("transition", "observable", "gate")


def random_state(rng: np.random.Generator) -> QuantumState:
    amp = rng.normal(size=2) + 1j * rng.normal(size=2)
    return QuantumState(amp / np.linalg.norm(amp))


def random_hermitian(rng: np.random.Generator) -> mat2.Mat2:
    return mat2.pauli_compose(*rng.uniform(-1.0, 1.0, 4))


def random_unitary(rng: np.random.Generator) -> mat2.Mat2:
    return mat2.expm_unitary(random_hermitian(rng), rng.uniform(0.1, 3.0))


def random_density(rng: np.random.Generator) -> DensityMatrix:
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    radius = rng.uniform(0.2, 0.95)  # keep the spectrum non-degenerate
    x, y, z = radius * direction
    return DensityMatrix.from_bloch(x, y, z)


def random_objective(family: str, rng: np.random.Generator) -> Objective:
    if family == "transition":
        return Transition(random_state(rng), random_state(rng))
    if family == "observable":
        return Observable(random_density(rng), random_hermitian(rng))
    if family == "gate":
        return Gate(random_unitary(rng))
    raise ValueError(f"unknown objective family {family!r}")


def fd_gradient(
    obj: Objective, pair: HamiltonianPair, control: ControlGrid, step: float = 1e-5
) -> np.ndarray:
    """Central finite differences of the objective in every component."""
    out = np.empty(control.n)
    base = control.values
    for k in range(control.n):
        bumped = base.copy()
        bumped[k] = base[k] + step
        hi = objective_value(obj, pair, control.with_values(bumped))
        bumped[k] = base[k] - step
        lo = objective_value(obj, pair, control.with_values(bumped))
        out[k] = (hi - lo) / (2.0 * step)
    return out


def gradient_rel_error(
    obj: Objective, pair: HamiltonianPair, control: ControlGrid, step: float = 1e-5
) -> float:
    analytic = gradient(obj, pair, control)
    numeric = fd_gradient(obj, pair, control, step)
    scale = max(float(np.linalg.norm(analytic)), 1e-12)
    return float(np.linalg.norm(analytic - numeric) / scale)


def l_functional_rel_error(
    obj: Objective, u: mat2.Mat2, a: mat2.Mat2, step: float = 1e-3
) -> float:
    analytic = l_functional(obj, u, a)

    def central(h: float) -> float:
        hi = value(obj, u @ mat2.expm_unitary(a, h))
        lo = value(obj, u @ mat2.expm_unitary(a, -h))
        return (hi - lo) / (2.0 * h)

    numeric = (4.0 * central(step / 2.0) - central(step)) / 3.0  # Richardson, O(h^4)
    # error relative to the functional's own magnitude, so near-zero L(A)
    # values with generic L do not blow the ratio up
    scale = max(
        abs(analytic),
        *(abs(l_functional(obj, u, p)) for p in (mat2.SIGMA_X, mat2.SIGMA_Y, mat2.SIGMA_Z)),
        1e-12,
    )
    return abs(analytic - numeric) / scale


def gradcheck(
    seed: int = 0,
    instances: int = 50,
    n_segments: int = 32,
    families: Sequence[str] = FAMILIES,
    threshold: float = 1e-6,
    fd_step: float = 1e-5,
    t_multiplier: float = 1.5,
    comm_floor: float = 1e-3,
    amplitude: float = 1.0,
) -> dict:
    """Gradient-vs-FD and L-vs-FD suites over random instances per family.

    Returns a deterministic report dict; ``passed`` is False as soon as any
    relative error exceeds the threshold.
    """
    per_family: dict[str, dict] = {}
    worst = 0.0
    for family in families:
        if family not in FAMILIES:
            raise ValueError(f"unknown objective family {family!r}")
        errors = []
        for k in range(instances):
            ss = np.random.SeedSequence(entropy=seed, spawn_key=(FAMILIES.index(family), k))
            pair_ss, start_ss = ss.spawn(2)
            rng = np.random.default_rng(ss)
            pair = random_pair(pair_ss, traceless=False, comm_floor=comm_floor)
            horizon = t_multiplier * min_time(pair)
            control = random_control(start_ss, n_segments, horizon, amplitude)
            obj = random_objective(family, rng)
            grad_err = gradient_rel_error(obj, pair, control, fd_step)
            u = random_unitary(rng)
            a = random_hermitian(rng)
            l_err = l_functional_rel_error(obj, u, a)
            errors.append(max(grad_err, l_err))
        fam_max = float(np.max(errors))
        worst = max(worst, fam_max)
        per_family[family] = {
            "instances": int(instances),
            "max_rel_err": fam_max,
        }
    return {
        "seed": int(seed),
        "instances_per_family": int(instances),
        "n_segments": int(n_segments),
        "fd_step": float(fd_step),
        "threshold": float(threshold),
        "per_family": per_family,
        "max_rel_err": float(worst),
        "passed": bool(worst < threshold),
    }
