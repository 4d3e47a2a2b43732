"""Pure-NumPy implementations of the hot propagation/gradient kernels.

Same call signatures as the compiled twin in ``_kernels_cy``; the active
backend is chosen in :mod:`qubitctl.kernels`.  Hamiltonians enter in split
form H = s*I + b.sigma (s scalar, b real 3-vector) so every segment
exponential and directional derivative is a closed-form SU(2) expression.

Objective modes: 0 = observable-type with payload (rho0, O),
1 = gate with payload (W, unused).
"""
from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_I2 = np.eye(2, dtype=np.complex128)


def _bloch_matrices(b: np.ndarray) -> np.ndarray:
    """Stack b.sigma for rows b[k] = (x, y, z); returns (N, 2, 2)."""
    out = np.empty((b.shape[0], 2, 2), dtype=np.complex128)
    out[:, 0, 0] = b[:, 2]
    out[:, 0, 1] = b[:, 0] - 1j * b[:, 1]
    out[:, 1, 0] = b[:, 0] + 1j * b[:, 1]
    out[:, 1, 1] = -b[:, 2]
    return out


def _segment_fields(s0, b0, sc, bc, f, dt):
    """Per-segment scalar part, Bloch part, radius and phase."""
    f = np.asarray(f, dtype=np.float64)
    s = s0 + f * sc
    b = b0[None, :] + f[:, None] * bc[None, :]
    r = np.sqrt(np.einsum("ij,ij->i", b, b))
    phase = np.exp(-1j * s * dt)
    return b, r, phase


def segment_unitaries(s0, b0, sc, bc, f, dt):
    """exp(-i*(H0 + f_k*V)*dt) for every segment; (N, 2, 2)."""
    b, r, phase = _segment_fields(s0, b0, sc, bc, f, dt)
    cos_t = np.cos(r * dt)
    sin_over_r = dt * np.sinc(r * dt / np.pi)
    e = (-1j * sin_over_r)[:, None, None] * _bloch_matrices(b)
    e[:, 0, 0] += cos_t
    e[:, 1, 1] += cos_t
    e *= phase[:, None, None]
    return e


def _segment_dexp(s0, b0, sc, bc, f, dt, v_mat):
    """d/de exp(-i*(H_k + e*V)*dt) at e = 0 for every segment; (N, 2, 2)."""
    b, r, phase = _segment_fields(s0, b0, sc, bc, f, dt)
    r_safe = np.where(r > 0.0, r, 1.0)
    n = b / r_safe[:, None]  # zero rows give P+ = P- = I/2, which is the r=0 limit
    ns = _bloch_matrices(n)
    p_plus = 0.5 * (_I2[None] + ns)
    p_minus = 0.5 * (_I2[None] - ns)
    d_plus = -1j * dt * np.exp(-1j * r * dt)
    d_minus = -1j * dt * np.exp(1j * r * dt)
    cross = -1j * dt * np.sinc(r * dt / np.pi)
    vp = v_mat[None]
    pvp = p_plus @ vp @ p_plus
    mvm = p_minus @ vp @ p_minus
    xterm = p_plus @ vp @ p_minus + p_minus @ vp @ p_plus
    d = (
        d_plus[:, None, None] * pvp
        + d_minus[:, None, None] * mvm
        + cross[:, None, None] * xterm
    )
    d *= phase[:, None, None]
    return d


def _prefix_products(e):
    """P[k] = E_k @ ... @ E_1 via a doubling scan; (N, 2, 2)."""
    p = e.copy()
    n = p.shape[0]
    off = 1
    while off < n:
        p[off:] = np.matmul(p[off:], p[:-off])
        off *= 2
    return p


def _suffix_products(e):
    """Q[k] = E_N @ ... @ E_(k+1) via a doubling scan; (N, 2, 2) with Q[N-1] = I."""
    n = e.shape[0]
    q = np.empty_like(e)
    q[: n - 1] = e[1:]
    q[n - 1] = _I2
    off = 1
    while off < n:
        q[: n - off] = np.matmul(q[off:], q[: n - off])
        off *= 2
    return q


def _reduce_product(e):
    """E_N @ ... @ E_1 by pairwise reduction (log-depth)."""
    m = e
    while m.shape[0] > 1:
        half = m.shape[0] // 2
        paired = np.matmul(m[1 : 2 * half : 2], m[0 : 2 * half : 2])
        if m.shape[0] % 2:
            paired = np.concatenate([paired, m[-1:]])
        m = paired
    return m[0]


def propagate_nodes(s0, b0, sc, bc, f, dt):
    """Node unitaries U_0 = I, U_1, ..., U_N; (N+1, 2, 2)."""
    e = segment_unitaries(s0, b0, sc, bc, f, dt)
    n = e.shape[0]
    nodes = np.empty((n + 1, 2, 2), dtype=np.complex128)
    nodes[0] = _I2
    nodes[1:] = _prefix_products(e)
    return nodes


def final_unitary(s0, b0, sc, bc, f, dt):
    e = segment_unitaries(s0, b0, sc, bc, f, dt)
    return _reduce_product(e)


def _value_from_final(u, mode, p1, p2):
    if mode == 0:
        return float(np.trace(u @ p1 @ u.conj().T @ p2).real)
    ty = np.trace(p1.conj().T @ u)
    return float(0.25 * (ty.real * ty.real + ty.imag * ty.imag))


def _adjoint_matrix(u, mode, p1, p2):
    """X with dF[dU] = 2*Re Tr(X dU) at the final unitary."""
    if mode == 0:
        return p1 @ u.conj().T @ p2
    ty = np.trace(p1.conj().T @ u)
    return 0.25 * np.conj(ty) * p1.conj().T


def objective_value(s0, b0, sc, bc, f, dt, mode, p1, p2):
    """Objective at the final unitary; cheapest call for line searches."""
    return _value_from_final(final_unitary(s0, b0, sc, bc, f, dt), mode, p1, p2)


def objective_value_and_grad(s0, b0, sc, bc, f, dt, mode, p1, p2, v_mat):
    """Objective and its exact per-segment gradient dF/df_k.

    The derivative of segment k's exponential is chained through the stored
    prefix products U_(k-1) and suffix products R_k, so the gradient is
    exact for the discretized objective (up to roundoff), not a midpoint
    approximation.
    """
    e = segment_unitaries(s0, b0, sc, bc, f, dt)
    n = e.shape[0]
    prefix = _prefix_products(e)
    u_final = prefix[-1]
    value = _value_from_final(u_final, mode, p1, p2)
    x = _adjoint_matrix(u_final, mode, p1, p2)

    u_prev = np.empty_like(e)
    u_prev[0] = _I2
    u_prev[1:] = prefix[: n - 1]
    d = _segment_dexp(s0, b0, sc, bc, f, dt, v_mat)
    xr = np.matmul(x[None], _suffix_products(e))
    m = np.matmul(xr, np.matmul(d, u_prev))
    grad = 2.0 * (m[:, 0, 0] + m[:, 1, 1]).real
    return value, np.ascontiguousarray(grad)
