"""Terminal-time objectives on the final unitary and their derivatives.

Three phase-invariant families are supported:

* ``Transition``  |<f|U|i>|^2, steering a pure state,
* ``Observable``  Tr[U rho0 U^dag O], the terminal expectation of O,
* ``Gate``        |Tr(W^dag U)|^2 / 4, matching a target unitary up to phase.

Each objective exposes its first-variation functional L(A), the real-linear
map with dF = L(A) along dU = -i U A, and the package-level :func:`gradient`
chains exact segment-exponential derivatives through it, so the returned
vector is the exact derivative of the discretized objective rather than a
midpoint approximation of the continuous kernel.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
import numpy.typing as npt

from . import kernels, mat2
from .dynamics import ControlGrid, HamiltonianPair
from .mat2 import Mat2

__all__ = [
    "QuantumState",
    "DensityMatrix",
    "Transition",
    "Observable",
    "Gate",
    "Objective",
    "KinematicRange",
    "ProjectorReduction",
    "DegenerateReduction",
    "reduce_observable",
    "value",
    "l_functional",
    "kinematic_range",
    "objective_value",
    "value_and_gradient",
    "gradient",
    "hessian",
    "hadamard",
    "not_gate",
    "phase_gate",
]

HESSIAN_SIZE_LIMIT = 512


def _frozen(a: np.ndarray) -> np.ndarray:
    out = a.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class QuantumState:
    """Pure state of the two-level system; amplitudes normalized to 1."""

    amplitudes: npt.NDArray[np.complex128]

    def __post_init__(self) -> None:
        amp = np.asarray(self.amplitudes, dtype=np.complex128)
        if amp.shape != (2,):
            raise ValueError("a qubit state has exactly two amplitudes")
        if abs(np.linalg.norm(amp) - 1.0) > 1e-12:
            raise ValueError("state norm deviates from 1 beyond 1e-12")
        object.__setattr__(self, "amplitudes", _frozen(amp))

    @staticmethod
    def basis(index: int) -> "QuantumState":
        amp = np.zeros(2, dtype=np.complex128)
        amp[index] = 1.0
        return QuantumState(amp)

    def projector(self) -> Mat2:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite 2x2 state."""

    matrix: Mat2

    def __post_init__(self) -> None:
        m = mat2.as_mat2(self.matrix)
        if not mat2.is_hermitian(m):
            raise ValueError("density matrix is not Hermitian to 1e-12")
        if abs(np.trace(m).real - 1.0) > 1e-12 or abs(np.trace(m).imag) > 1e-12:
            raise ValueError("density matrix trace deviates from 1 beyond 1e-12")
        if self._eigs(m)[0] < -1e-12:
            raise ValueError("density matrix has an eigenvalue below -1e-12")
        object.__setattr__(self, "matrix", _frozen(m))

    @staticmethod
    def _eigs(m: Mat2) -> tuple[float, float]:
        c = mat2.pauli_decompose(m)
        r = float(np.linalg.norm(c.bloch()))
        return c.c_i.real - r, c.c_i.real + r

    def eigenvalues(self) -> tuple[float, float]:
        """(w0, w1) with w0 <= w1."""
        return self._eigs(self.matrix)

    @staticmethod
    def pure(state: QuantumState) -> "DensityMatrix":
        return DensityMatrix(state.projector())

    @staticmethod
    def from_bloch(x: float, y: float, z: float) -> "DensityMatrix":
        return DensityMatrix(mat2.pauli_compose(0.5, 0.5 * x, 0.5 * y, 0.5 * z))


@dataclass(frozen=True)
class KinematicRange:
    """Attainable objective extremes over all final unitaries."""

    lo: float
    hi: float
    degenerate: bool = False

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError("kinematic range must satisfy lo <= hi")


@dataclass(frozen=True)
class ProjectorReduction:
    """Tr[rho O] = offset + scale * Tr[rho projector] with scale > 0."""

    projector: Mat2
    offset: float
    scale: float


@dataclass(frozen=True)
class DegenerateReduction:
    """O proportional to the identity; the objective is constant."""

    constant: float


def reduce_observable(
    operator: npt.ArrayLike, tol: float = 1e-12
) -> Union[ProjectorReduction, DegenerateReduction]:
    """Split a Hermitian observable into a rank-1 projector plus affine map."""
    op = mat2.as_mat2(operator)
    if not mat2.is_hermitian(op):
        raise ValueError("observable is not Hermitian to 1e-12")
    c = mat2.pauli_decompose(op)
    b = c.bloch()
    r = float(np.linalg.norm(b))
    lam_lo, lam_hi = c.c_i.real - r, c.c_i.real + r
    if lam_hi - lam_lo <= tol * max(1.0, abs(lam_lo), abs(lam_hi)):
        return DegenerateReduction(constant=lam_lo)
    n = b / r
    projector = 0.5 * (mat2.I2 + mat2.pauli_compose(0.0, n[0], n[1], n[2]))
    return ProjectorReduction(projector=projector, offset=lam_lo, scale=lam_hi - lam_lo)


class Objective:
    """Common interface; see the concrete families below."""

    def value(self, u: npt.ArrayLike) -> float:
        raise NotImplementedError

    def l_functional(self, u: npt.ArrayLike, a: npt.ArrayLike) -> float:
        raise NotImplementedError

    def kinematic_range(self) -> KinematicRange:
        raise NotImplementedError

    def _kernel_payload(self) -> tuple[int, Mat2, Mat2]:
        raise NotImplementedError


def _observable_value(rho0: Mat2, op: Mat2, u: Mat2) -> float:
    return float(np.trace(u @ rho0 @ u.conj().T @ op).real)


def _observable_l(rho0: Mat2, op: Mat2, u: Mat2, a: Mat2) -> float:
    o_t = u.conj().T @ op @ u
    return float((-1j * np.trace((rho0 @ o_t - o_t @ rho0) @ a)).real)


@dataclass(frozen=True)
class Transition(Objective):
    """|<final| U |initial>|^2; the rho0 = |i><i|, O = |f><f| observable."""

    initial: QuantumState
    final: QuantumState

    def __post_init__(self) -> None:
        object.__setattr__(self, "_rho0", _frozen(self.initial.projector()))
        object.__setattr__(self, "_proj", _frozen(self.final.projector()))

    def value(self, u: npt.ArrayLike) -> float:
        amp = self.final.amplitudes.conj() @ mat2.as_mat2(u) @ self.initial.amplitudes
        return float(abs(amp) ** 2)

    def l_functional(self, u: npt.ArrayLike, a: npt.ArrayLike) -> float:
        return _observable_l(self._rho0, self._proj, mat2.as_mat2(u), mat2.as_mat2(a))

    def kinematic_range(self) -> KinematicRange:
        return KinematicRange(0.0, 1.0)

    def _kernel_payload(self) -> tuple[int, Mat2, Mat2]:
        return 0, self._rho0, self._proj


@dataclass(frozen=True)
class Observable(Objective):
    """Terminal expectation Tr[U rho0 U^dag O] for Hermitian O."""

    rho0: DensityMatrix
    operator: Mat2

    def __post_init__(self) -> None:
        op = mat2.as_mat2(self.operator)
        if not mat2.is_hermitian(op):
            raise ValueError("observable is not Hermitian to 1e-12")
        object.__setattr__(self, "operator", _frozen(op))

    def value(self, u: npt.ArrayLike) -> float:
        return _observable_value(self.rho0.matrix, self.operator, mat2.as_mat2(u))

    def l_functional(self, u: npt.ArrayLike, a: npt.ArrayLike) -> float:
        return _observable_l(
            self.rho0.matrix, self.operator, mat2.as_mat2(u), mat2.as_mat2(a)
        )

    def kinematic_range(self) -> KinematicRange:
        reduced = reduce_observable(self.operator)
        if isinstance(reduced, DegenerateReduction):
            return KinematicRange(reduced.constant, reduced.constant, degenerate=True)
        w0, w1 = self.rho0.eigenvalues()
        lo = reduced.offset + reduced.scale * w0
        hi = reduced.offset + reduced.scale * w1
        if w1 - w0 <= 1e-12:
            mid = reduced.offset + reduced.scale * 0.5
            return KinematicRange(mid, mid, degenerate=True)
        return KinematicRange(lo, hi)

    def _kernel_payload(self) -> tuple[int, Mat2, Mat2]:
        return 0, self.rho0.matrix, self.operator


@dataclass(frozen=True)
class Gate(Objective):
    """|Tr(W^dag U)|^2 / 4 for a target unitary W; maximal value 1 is
    reached exactly on U = e^{i phi} W."""

    w: Mat2

    def __post_init__(self) -> None:
        wm = mat2.as_mat2(self.w)
        if not mat2.is_unitary(wm):
            raise ValueError("gate target is not unitary to 1e-12")
        object.__setattr__(self, "w", _frozen(wm))

    def value(self, u: npt.ArrayLike) -> float:
        ty = np.trace(self.w.conj().T @ mat2.as_mat2(u))
        return float(0.25 * abs(ty) ** 2)

    def l_functional(self, u: npt.ArrayLike, a: npt.ArrayLike) -> float:
        y = self.w.conj().T @ mat2.as_mat2(u)
        ty = np.trace(y)
        tya = np.trace(y @ mat2.as_mat2(a))
        return float(0.5 * (ty.real * tya.imag - ty.imag * tya.real))

    def kinematic_range(self) -> KinematicRange:
        return KinematicRange(0.0, 1.0)

    def _kernel_payload(self) -> tuple[int, Mat2, Mat2]:
        return 1, self.w, mat2.I2


def value(obj: Objective, u: npt.ArrayLike) -> float:
    """Objective evaluated at a final unitary."""
    return obj.value(u)


def l_functional(obj: Objective, u: npt.ArrayLike, a: npt.ArrayLike) -> float:
    """First-variation functional L(A) at the final unitary U.

    L is the real-linear map with d/de F(U exp(-i e A))|_0 = L(A) for
    Hermitian A; phase invariance of every family forces L(I) = 0.
    """
    return obj.l_functional(u, a)


def kinematic_range(obj: Objective) -> KinematicRange:
    return obj.kinematic_range()


def objective_value(obj: Objective, pair: HamiltonianPair, control: ControlGrid) -> float:
    """F(f) for a piecewise-constant control, without building a trajectory."""
    s0, b0, sc, bc = pair.split()
    mode, p1, p2 = obj._kernel_payload()
    return kernels.objective_value(s0, b0, sc, bc, control.values, control.dt, mode, p1, p2)


def value_and_gradient(
    obj: Objective, pair: HamiltonianPair, control: ControlGrid
) -> tuple[float, npt.NDArray[np.float64]]:
    """F(f) and the exact gradient dF/df_k of the discretized objective."""
    s0, b0, sc, bc = pair.split()
    mode, p1, p2 = obj._kernel_payload()
    return kernels.objective_value_and_grad(
        s0, b0, sc, bc, control.values, control.dt, mode, p1, p2, pair.v
    )


def gradient(
    obj: Objective, pair: HamiltonianPair, control: ControlGrid
) -> npt.NDArray[np.float64]:
    return value_and_gradient(obj, pair, control)[1]


def hessian(
    obj: Objective,
    pair: HamiltonianPair,
    control: ControlGrid,
    step: float | None = None,
) -> npt.NDArray[np.float64]:
    """Symmetrized central finite differences of the analytic gradient.

    The step defaults to 1e-5 * max(1, ||f||_inf); accuracy is ~1e-7, enough
    to sign eigenvalues away from zero.  Guarded to N <= 512 for cost.
    """
    n = control.n
    if n > HESSIAN_SIZE_LIMIT:
        raise ValueError(f"Hessian limited to N <= {HESSIAN_SIZE_LIMIT}, got {n}")
    f = control.values
    h = step if step is not None else 1e-5 * max(1.0, float(np.abs(f).max()))
    out = np.empty((n, n))
    for j in range(n):
        bumped = f.copy()
        bumped[j] = f[j] + h
        g_plus = gradient(obj, pair, control.with_values(bumped))
        bumped[j] = f[j] - h
        g_minus = gradient(obj, pair, control.with_values(bumped))
        out[:, j] = (g_plus - g_minus) / (2.0 * h)
    return 0.5 * (out + out.T)


def hadamard() -> Mat2:
    return np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / np.sqrt(2.0)


def not_gate() -> Mat2:
    return mat2.SIGMA_X.copy()


def phase_gate(phi: float) -> Mat2:
    """diag(1, e^{i phi})."""
    return np.array([[1.0, 0.0], [0.0, np.exp(1j * phi)]], dtype=np.complex128)
