"""System definition and piecewise-constant Schrodinger propagation.

A system is a pair (H0, V) of Hermitian 2x2 matrices with [H0, V] != 0,
driven by i dU/dt = (H0 + f(t) V) U with a real control f.  Controls are
piecewise constant on a uniform grid, so each segment propagator is an
exact SU(2) exponential and refining the grid of a fixed control changes
nothing beyond roundoff.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from . import kernels, mat2
from .mat2 import Mat2

__all__ = [
    "DegeneratePairError",
    "HamiltonianPair",
    "ControlGrid",
    "Trajectory",
    "CanonicalFrame",
    "propagate",
    "heisenberg_interaction",
    "exceptional_control",
    "nested_commutator",
    "min_time",
    "canonical_frame",
]

COMMUTATOR_FLOOR = 1e-9


class DegeneratePairError(ValueError):
    """Raised when [H0, V] vanishes to tolerance; the exceptional control,
    minimal time and canonical frame are numerically meaningless there."""


def _frozen_copy(a: npt.ArrayLike) -> Mat2:
    m = mat2.as_mat2(a).copy()
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class HamiltonianPair:
    """Free Hamiltonian H0 and control coupling V (hbar = 1).

    ``traceless`` asserts Tr V = 0 on construction; several landscape
    statements hold only under that hypothesis.
    """

    h0: Mat2
    v: Mat2
    traceless: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "h0", _frozen_copy(self.h0))
        object.__setattr__(self, "v", _frozen_copy(self.v))
        if not mat2.is_hermitian(self.h0):
            raise ValueError("H0 is not Hermitian to tolerance 1e-12")
        if not mat2.is_hermitian(self.v):
            raise ValueError("V is not Hermitian to tolerance 1e-12")
        if self.commutator_norm() <= COMMUTATOR_FLOOR:
            raise DegeneratePairError(
                f"[H0, V] has spectral norm {self.commutator_norm():.3e} <= "
                f"{COMMUTATOR_FLOOR:g}; the pair is degenerate"
            )
        if self.traceless and abs(np.trace(self.v)) >= 1e-12:
            raise ValueError("traceless flag set but |Tr V| >= 1e-12")
        s0, b0 = mat2.hermitian_parts(self.h0)
        sc, bc = mat2.hermitian_parts(self.v)
        object.__setattr__(self, "_split", (s0, b0, sc, bc))

    def commutator_norm(self) -> float:
        return mat2.spectral_norm(mat2.commutator(self.h0, self.v))

    def split(self) -> tuple[float, np.ndarray, float, np.ndarray]:
        """(s0, b0, sv, bv) with H0 = s0 I + b0.sigma, V = sv I + bv.sigma."""
        return self._split  # type: ignore[attr-defined]

    def hamiltonian(self, f: float) -> Mat2:
        """H0 + f*V."""
        return self.h0 + f * self.v


@dataclass(frozen=True)
class ControlGrid:
    """Piecewise-constant control on [0, T]: values[k] on segment k."""

    total_time: float
    values: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        vals = np.atleast_1d(np.asarray(self.values, dtype=np.float64)).copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size < 1:
            raise ValueError("control values must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(vals)):
            raise ValueError("control values must be finite")
        if not (np.isfinite(self.total_time) and self.total_time > 0.0):
            raise ValueError("total time must be positive and finite")

    @staticmethod
    def constant(value: float, n: int, total_time: float) -> "ControlGrid":
        return ControlGrid(total_time, np.full(int(n), float(value)))

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def dt(self) -> float:
        return self.total_time / self.n

    def node_times(self) -> npt.NDArray[np.float64]:
        return np.linspace(0.0, self.total_time, self.n + 1)

    def midpoint_times(self) -> npt.NDArray[np.float64]:
        return (np.arange(self.n) + 0.5) * self.dt

    def with_values(self, values: npt.ArrayLike) -> "ControlGrid":
        return ControlGrid(self.total_time, np.asarray(values, dtype=np.float64))

    def refine(self, factor: int = 2) -> "ControlGrid":
        """Same control function on a grid with ``factor`` times the segments."""
        return ControlGrid(self.total_time, np.repeat(self.values, int(factor)))


UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class Trajectory:
    """Propagators U_{t_k} at the N+1 grid nodes; U_{t_0} = I exactly."""

    node_unitaries: npt.NDArray[np.complex128]

    def __post_init__(self) -> None:
        u = np.asarray(self.node_unitaries, dtype=np.complex128)
        if u.ndim != 3 or u.shape[1:] != (2, 2) or u.shape[0] < 1:
            raise ValueError("node unitaries must have shape (N+1, 2, 2)")
        if np.abs(u[0] - mat2.I2).max() != 0.0:
            raise ValueError("the first node propagator must be the identity")
        dev = np.abs(np.matmul(u.conj().transpose(0, 2, 1), u) - mat2.I2).max()
        if dev > UNITARITY_TOL:
            raise ValueError(f"node propagators deviate from unitarity by {dev:.3e}")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "node_unitaries", u)

    @property
    def n_segments(self) -> int:
        return self.node_unitaries.shape[0] - 1

    @property
    def final(self) -> Mat2:
        """U_T."""
        return self.node_unitaries[-1]

    def __getitem__(self, k: int) -> Mat2:
        return self.node_unitaries[k]


def propagate(pair: HamiltonianPair, control: ControlGrid) -> Trajectory:
    """Solve i dU/dt = (H0 + f V) U across the grid; exact per segment."""
    s0, b0, sc, bc = pair.split()
    nodes = kernels.propagate_nodes(s0, b0, sc, bc, control.values, control.dt)
    nodes[0] = mat2.I2
    return Trajectory(nodes)


def heisenberg_interaction(traj: Trajectory, pair: HamiltonianPair, k: int) -> Mat2:
    """V_{t_k} = U_{t_k}^dag V U_{t_k}; Hermitian, isospectral to V."""
    if not 0 <= k <= traj.n_segments:
        raise IndexError(f"node index {k} outside 0..{traj.n_segments}")
    u = traj[k]
    return u.conj().T @ pair.v @ u


def nested_commutator(pair: HamiltonianPair, f: float) -> Mat2:
    """[H0, [H0, V]] + f*[V, [H0, V]]; Hermitian and traceless."""
    inner = mat2.commutator(pair.h0, pair.v)
    return mat2.commutator(pair.h0, inner) + f * mat2.commutator(pair.v, inner)


def _rank_family(pair: HamiltonianPair, f: float) -> list[Mat2]:
    return [mat2.I2, pair.v, mat2.commutator(pair.h0, pair.v), nested_commutator(pair, f)]


def exceptional_control(pair: HamiltonianPair) -> float:
    """The unique constant control degenerating the nested-commutator family
    {I, V, [H0,V], [H0,[H0,V]] + f*[V,[H0,V]]}.

    Solving the trace system of that linear-dependence condition gives

        f0 = (Tr V * Tr H0 - 2 Tr(H0 V)) / (2 Tr(V^2) - (Tr V)^2),

    whose denominator equals 4*|traceless part of V|^2 and is positive for
    any non-degenerate pair.  The defining rank-deficiency property is
    re-checked at runtime rather than trusted from the formula.
    """
    tr_v = np.trace(pair.v).real
    tr_h = np.trace(pair.h0).real
    tr_hv = np.trace(pair.h0 @ pair.v).real
    tr_v2 = np.trace(pair.v @ pair.v).real
    denom = 2.0 * tr_v2 - tr_v * tr_v
    if denom <= 0.0:
        raise DegeneratePairError("V is proportional to the identity")
    f0 = (tr_v * tr_h - 2.0 * tr_hv) / denom
    if mat2.complex_rank(_rank_family(pair, f0)) > 3:
        raise ArithmeticError(
            "rank certificate failed: family not degenerate at the computed f0"
        )
    return float(f0)


def min_time(pair: HamiltonianPair) -> float:
    """pi / ||H0 - Tr(H0)/2 + f0*V||, the horizon below which the
    exceptional-control analysis is not guaranteed."""
    f0 = exceptional_control(pair)
    shifted = pair.h0 - 0.5 * np.trace(pair.h0).real * mat2.I2 + f0 * pair.v
    return float(np.pi / mat2.spectral_norm(shifted))


@dataclass(frozen=True)
class CanonicalFrame:
    """Basis and time rescaling that map H0 + f0*V to sigma_z.

    In the rotated basis the traceless part of H0 + f0*V equals
    time_scale * sigma_z with time_scale > 0, and V decomposes as
    v*cos(phi)*sigma_x + v*sin(phi)*sigma_y + v_z*sigma_z + v_0*I.
    """

    basis_change: Mat2
    time_scale: float
    v: float
    phi: float
    v_z: float
    v_0: float

    def to_frame(self, a: npt.ArrayLike) -> Mat2:
        """Conjugate a matrix into the canonical basis."""
        q = self.basis_change
        return q.conj().T @ mat2.as_mat2(a) @ q

    def from_frame(self, a: npt.ArrayLike) -> Mat2:
        q = self.basis_change
        return q @ mat2.as_mat2(a) @ q.conj().T


def _positive_eigenvector(b: np.ndarray, r: float) -> np.ndarray:
    """Unit eigenvector of b.sigma for eigenvalue +r, stable for any b."""
    bx, by, bz = b
    if bz >= 0.0:
        vec = np.array([r + bz, bx + 1j * by], dtype=np.complex128)
    else:
        vec = np.array([bx - 1j * by, r - bz], dtype=np.complex128)
    vec /= np.linalg.norm(vec)
    # fix the gauge: largest component real and positive
    pivot = vec[np.argmax(np.abs(vec))]
    vec *= np.conj(pivot) / abs(pivot)
    return vec


def canonical_frame(pair: HamiltonianPair) -> CanonicalFrame:
    """Diagonalize the traceless part of H0 + f0*V and read off V there."""
    f0 = exceptional_control(pair)
    h_eff = pair.h0 + f0 * pair.v
    _, b = mat2.hermitian_parts(h_eff)
    r = float(np.linalg.norm(b))
    if r <= 0.0:
        raise DegeneratePairError("H0 + f0*V is proportional to the identity")
    plus = _positive_eigenvector(b, r)
    minus = np.array([-np.conj(plus[1]), np.conj(plus[0])], dtype=np.complex128)
    q = np.column_stack([plus, minus])
    coeffs = mat2.pauli_decompose(q.conj().T @ pair.v @ q)
    vx, vy = coeffs.c_x.real, coeffs.c_y.real
    v = float(np.hypot(vx, vy))
    # v = ||[H0, V]|| / (2*time_scale), so the pair invariant forces v > 0
    assert v > 0.0, "v = 0 would contradict [H0, V] != 0"
    return CanonicalFrame(
        basis_change=q,
        time_scale=r,
        v=v,
        phi=float(np.arctan2(vy, vx)),
        v_z=float(coeffs.c_z.real),
        v_0=float(coeffs.c_i.real),
    )
