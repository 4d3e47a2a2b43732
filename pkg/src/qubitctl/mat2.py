"""Closed-form arithmetic for 2x2 complex matrices.

Everything here is exact up to roundoff: unitary exponentials, directional
derivatives of the exponential, spectral norms, and numerical rank are all
computed from the Pauli decomposition or 2x2 quadratic formulas, never by
series or general-purpose decompositions.  All functions are pure and all
returned arrays are freshly allocated, so values can be shared freely
between concurrent workers.
"""
from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

import numpy as np
import numpy.typing as npt

Mat2 = npt.NDArray[np.complex128]

__all__ = [
    "Mat2",
    "PauliCoeffs",
    "I2",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "as_mat2",
    "is_hermitian",
    "is_unitary",
    "is_traceless",
    "pauli_decompose",
    "pauli_compose",
    "hermitian_parts",
    "expm_unitary",
    "dexp_direction",
    "commutator",
    "singular_values",
    "spectral_norm",
    "complex_rank",
]

I2: Mat2 = np.eye(2, dtype=np.complex128)
SIGMA_X: Mat2 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
SIGMA_Y: Mat2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
SIGMA_Z: Mat2 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)

HERMITICITY_TOL = 1e-12


class PauliCoeffs(NamedTuple):
    """Coefficients of A = c_i*I + c_x*sigma_x + c_y*sigma_y + c_z*sigma_z.

    All four coefficients are real (to roundoff) iff the source matrix is
    Hermitian.
    """

    c_i: complex
    c_x: complex
    c_y: complex
    c_z: complex

    def bloch(self) -> npt.NDArray[np.float64]:
        """Real (x, y, z) part; only meaningful for Hermitian sources."""
        return np.array([self.c_x.real, self.c_y.real, self.c_z.real])


def as_mat2(a: npt.ArrayLike) -> Mat2:
    """Coerce to a (2, 2) complex128 array, validating the shape."""
    m = np.asarray(a, dtype=np.complex128)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    return m


def is_hermitian(a: npt.ArrayLike, tol: float = HERMITICITY_TOL) -> bool:
    m = as_mat2(a)
    return bool(np.abs(m - m.conj().T).max() <= tol)


def is_unitary(a: npt.ArrayLike, tol: float = HERMITICITY_TOL) -> bool:
    m = as_mat2(a)
    return bool(np.abs(m.conj().T @ m - I2).max() <= tol)


def is_traceless(a: npt.ArrayLike, tol: float = HERMITICITY_TOL) -> bool:
    return bool(abs(np.trace(as_mat2(a))) <= tol)


def pauli_decompose(a: npt.ArrayLike) -> PauliCoeffs:
    """Project onto {I, sigma_x, sigma_y, sigma_z}: c_k = Tr(sigma_k A) / 2."""
    m = as_mat2(a)
    return PauliCoeffs(
        c_i=0.5 * (m[0, 0] + m[1, 1]),
        c_x=0.5 * (m[0, 1] + m[1, 0]),
        c_y=0.5j * (m[0, 1] - m[1, 0]),
        c_z=0.5 * (m[0, 0] - m[1, 1]),
    )


def pauli_compose(c_i: complex, c_x: complex, c_y: complex, c_z: complex) -> Mat2:
    """Inverse of :func:`pauli_decompose`; exact round trip."""
    return np.array(
        [[c_i + c_z, c_x - 1j * c_y], [c_x + 1j * c_y, c_i - c_z]],
        dtype=np.complex128,
    )


def hermitian_parts(h: npt.ArrayLike) -> tuple[float, npt.NDArray[np.float64]]:
    """Split a Hermitian matrix into (scalar, bloch) with H = s*I + b.sigma.

    Raises ValueError for non-Hermitian input.
    """
    m = as_mat2(h)
    if not is_hermitian(m):
        raise ValueError("matrix is not Hermitian to tolerance 1e-12")
    c = pauli_decompose(m)
    return c.c_i.real, c.bloch()


def expm_unitary(h: npt.ArrayLike, dt: float) -> Mat2:
    """exp(-i*H*dt) for Hermitian H, via the SU(2) closed form.

    With H = s*I + b.sigma and r = |b| the result is
    exp(-i*s*dt) * (cos(r*dt)*I - i*sin(r*dt)*(b.sigma)/r); the r -> 0
    limit is handled by sin(r*dt)/r = dt*sinc(r*dt).
    """
    if not np.isfinite(dt):
        raise ValueError("dt must be finite")
    s, b = hermitian_parts(h)
    r = float(np.linalg.norm(b))
    phase = np.exp(-1j * s * dt)
    cos_term = np.cos(r * dt)
    sin_over_r = dt * np.sinc(r * dt / np.pi)  # sin(r*dt)/r without a 0/0 branch
    bx, by, bz = b
    return phase * np.array(
        [
            [cos_term - 1j * sin_over_r * bz, -1j * sin_over_r * (bx - 1j * by)],
            [-1j * sin_over_r * (bx + 1j * by), cos_term + 1j * sin_over_r * bz],
        ],
        dtype=np.complex128,
    )


def dexp_direction(h: npt.ArrayLike, v: npt.ArrayLike, dt: float) -> Mat2:
    """Exact directional derivative d/de exp(-i*(H + e*V)*dt) at e = 0.

    Uses the Daleckii-Krein divided-difference formula on the eigenbasis of
    H.  For the 2x2 case the divided difference has the branch-free form
    (f(l+) - f(l-))/(l+ - l-) = -i*dt*exp(-i*s*dt)*sinc(r*dt), which equals
    the confluent limit -i*dt*exp(-i*l*dt) when the eigenvalues collide, so
    near-degenerate spectra cost no accuracy.
    """
    s, b = hermitian_parts(h)
    vm = as_mat2(v)
    if not is_hermitian(vm):
        raise ValueError("direction matrix is not Hermitian to tolerance 1e-12")
    r = float(np.linalg.norm(b))
    phase = np.exp(-1j * s * dt)
    if r == 0.0:
        return (-1j * dt) * phase * vm
    n = b / r
    ns = pauli_compose(0.0, n[0], n[1], n[2])
    p_plus = 0.5 * (I2 + ns)
    p_minus = 0.5 * (I2 - ns)
    d_plus = -1j * dt * np.exp(-1j * r * dt)  # f'(lambda_+) / phase
    d_minus = -1j * dt * np.exp(1j * r * dt)
    cross = -1j * dt * np.sinc(r * dt / np.pi)
    return phase * (
        d_plus * (p_plus @ vm @ p_plus)
        + d_minus * (p_minus @ vm @ p_minus)
        + cross * (p_plus @ vm @ p_minus + p_minus @ vm @ p_plus)
    )


def commutator(a: npt.ArrayLike, b: npt.ArrayLike) -> Mat2:
    """A@B - B@A."""
    am, bm = as_mat2(a), as_mat2(b)
    return am @ bm - bm @ am


def singular_values(a: npt.ArrayLike) -> tuple[float, float]:
    """Both singular values (descending), from the 2x2 quadratic formula.

    The eigenvalues of A^dag A are m +/- sqrt(m^2 - det) with
    m = Tr(A^dag A)/2 and det = |det A|^2.
    """
    m = as_mat2(a)
    g = m.conj().T @ m
    mean = 0.5 * (g[0, 0] + g[1, 1]).real
    det = (g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]).real
    disc = max(mean * mean - det, 0.0)
    root = float(np.sqrt(disc))
    hi = max(mean + root, 0.0)
    lo = max(mean - root, 0.0)
    return float(np.sqrt(hi)), float(np.sqrt(lo))


def spectral_norm(a: npt.ArrayLike) -> float:
    """Largest singular value."""
    return singular_values(a)[0]


def complex_rank(family: Sequence[npt.ArrayLike] | Iterable[npt.ArrayLike], tol: float = 1e-10) -> int:
    """Numerical rank of a family of 2x2 matrices over complex scalars.

    The matrices are vectorized into rows and singular values above
    tol * sigma_max are counted.  The default tolerance sits far above
    double-precision noise and far below generic spectral gaps.
    """
    mats = [as_mat2(m) for m in family]
    if not mats:
        raise ValueError("rank of an empty family is undefined")
    if len(mats) > 8:
        raise ValueError("family size is limited to 8 matrices")
    stacked = np.array([m.ravel() for m in mats])
    sv = np.linalg.svd(stacked, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > tol * sv[0]))
