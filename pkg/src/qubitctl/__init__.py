"""Coherent control of two-level quantum systems with landscape certification.

The package propagates piecewise-constant controls exactly, differentiates
the standard terminal-time objectives analytically, classifies critical
points, analyses the exceptional constant control, and runs reproducible
Monte-Carlo sweeps that search for optimization traps.
"""
from __future__ import annotations

from .dynamics import (
    CanonicalFrame,
    ControlGrid,
    DegeneratePairError,
    HamiltonianPair,
    Trajectory,
    canonical_frame,
    nested_commutator,
    exceptional_control,
    heisenberg_interaction,
    min_time,
    propagate,
)
from .kernels import backend as kernel_backend
from .landscape import (
    ClassifiedPoint,
    F0Report,
    HarmonicWindow,
    HypothesisViolation,
    OptimizerConfig,
    PointKind,
    RunRecord,
    RunStatus,
    SweepConfig,
    SweepReport,
    Tolerances,
    Verdict,
    ascend,
    classify,
    cos4_variation,
    counterexample_variation,
    f0_second_order_report,
    second_order_response,
    rank_profile,
    random_control,
    random_pair,
    step_variation,
    sweep,
    variation_admissible,
)
from .mat2 import (
    I2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    PauliCoeffs,
    commutator,
    complex_rank,
    dexp_direction,
    expm_unitary,
    pauli_compose,
    pauli_decompose,
    spectral_norm,
)
from .objectives import (
    DensityMatrix,
    Gate,
    KinematicRange,
    Objective,
    Observable,
    QuantumState,
    Transition,
    gradient,
    hadamard,
    hessian,
    kinematic_range,
    l_functional,
    not_gate,
    phase_gate,
    reduce_observable,
    value,
)

__version__ = "0.1.0"
