# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot propagation/gradient kernels.

Mirrors the interface of ``qubitctl._kernels_py``; see that module for the
semantics.  Everything is explicit 2x2 complex arithmetic with no Python
objects inside the loops.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, sin, sqrt

cnp.import_array()

BACKEND_NAME = "compiled"

ctypedef double complex dc


cdef inline double _sinc(double x) nogil:
    if fabs(x) > 1e-8:
        return sin(x) / x
    return 1.0 - x * x / 6.0


cdef inline void _mm(const dc* a, const dc* b, dc* out) nogil:
    # out = a @ b, row-major [00, 01, 10, 11]; out must not alias inputs
    out[0] = a[0] * b[0] + a[1] * b[2]
    out[1] = a[0] * b[1] + a[1] * b[3]
    out[2] = a[2] * b[0] + a[3] * b[2]
    out[3] = a[2] * b[1] + a[3] * b[3]


cdef inline void _segment_exp(
    double s, double bx, double by, double bz, double dt, dc* out
) nogil:
    cdef double r = sqrt(bx * bx + by * by + bz * bz)
    cdef double rdt = r * dt
    cdef dc phase = cos(s * dt) - 1j * sin(s * dt)
    cdef double c = cos(rdt)
    cdef double so = dt * _sinc(rdt)  # sin(r*dt)/r
    out[0] = phase * (c - 1j * so * bz)
    out[1] = phase * (-1j * so * (bx - 1j * by))
    out[2] = phase * (-1j * so * (bx + 1j * by))
    out[3] = phase * (c + 1j * so * bz)


cdef inline void _segment_dexp(
    double s, double bx, double by, double bz, double dt, const dc* v, dc* out
) nogil:
    # d/de exp(-i (H + e V) dt) at e = 0; Daleckii-Krein on the 2x2 eigenbasis
    cdef double r = sqrt(bx * bx + by * by + bz * bz)
    cdef dc phase = cos(s * dt) - 1j * sin(s * dt)
    cdef dc dp, dm, cross
    cdef dc pp[4]
    cdef dc pm[4]
    cdef dc t1[4]
    cdef dc ppvpp[4]
    cdef dc pmvpm[4]
    cdef dc ppvpm[4]
    cdef dc pmvpp[4]
    cdef double nx, ny, nz, rdt
    cdef int i
    if r == 0.0:
        for i in range(4):
            out[i] = phase * (-1j * dt) * v[i]
        return
    nx = bx / r
    ny = by / r
    nz = bz / r
    pp[0] = 0.5 * (1.0 + nz)
    pp[1] = 0.5 * (nx - 1j * ny)
    pp[2] = 0.5 * (nx + 1j * ny)
    pp[3] = 0.5 * (1.0 - nz)
    pm[0] = 1.0 - pp[0]
    pm[1] = -pp[1]
    pm[2] = -pp[2]
    pm[3] = 1.0 - pp[3]
    rdt = r * dt
    dp = -1j * dt * (cos(rdt) - 1j * sin(rdt))
    dm = -1j * dt * (cos(rdt) + 1j * sin(rdt))
    cross = -1j * dt * _sinc(rdt)
    _mm(pp, v, t1)
    _mm(t1, pp, ppvpp)
    _mm(t1, pm, ppvpm)
    _mm(pm, v, t1)
    _mm(t1, pm, pmvpm)
    _mm(t1, pp, pmvpp)
    for i in range(4):
        out[i] = phase * (
            dp * ppvpp[i] + dm * pmvpm[i] + cross * (ppvpm[i] + pmvpp[i])
        )


def segment_unitaries(
    double s0, const double[::1] b0, double sc, const double[::1] bc,
    const double[::1] f, double dt
):
    cdef Py_ssize_t n = f.shape[0]
    cdef cnp.ndarray out = np.empty((n, 2, 2), dtype=np.complex128)
    cdef dc[:, :, ::1] ov = out
    cdef Py_ssize_t k
    with nogil:
        for k in range(n):
            _segment_exp(
                s0 + f[k] * sc,
                b0[0] + f[k] * bc[0],
                b0[1] + f[k] * bc[1],
                b0[2] + f[k] * bc[2],
                dt,
                &ov[k, 0, 0],
            )
    return out


def propagate_nodes(
    double s0, const double[::1] b0, double sc, const double[::1] bc,
    const double[::1] f, double dt
):
    cdef Py_ssize_t n = f.shape[0]
    cdef cnp.ndarray out = np.empty((n + 1, 2, 2), dtype=np.complex128)
    cdef dc[:, :, ::1] ov = out
    cdef dc u[4]
    cdef dc e[4]
    cdef dc nxt[4]
    cdef Py_ssize_t k
    cdef int i
    u[0] = 1.0; u[1] = 0.0; u[2] = 0.0; u[3] = 1.0
    with nogil:
        ov[0, 0, 0] = 1.0; ov[0, 0, 1] = 0.0; ov[0, 1, 0] = 0.0; ov[0, 1, 1] = 1.0
        for k in range(n):
            _segment_exp(
                s0 + f[k] * sc,
                b0[0] + f[k] * bc[0],
                b0[1] + f[k] * bc[1],
                b0[2] + f[k] * bc[2],
                dt,
                e,
            )
            _mm(e, u, nxt)
            for i in range(4):
                u[i] = nxt[i]
            ov[k + 1, 0, 0] = u[0]; ov[k + 1, 0, 1] = u[1]
            ov[k + 1, 1, 0] = u[2]; ov[k + 1, 1, 1] = u[3]
    return out


def final_unitary(
    double s0, const double[::1] b0, double sc, const double[::1] bc,
    const double[::1] f, double dt
):
    cdef Py_ssize_t n = f.shape[0]
    cdef cnp.ndarray out = np.empty((2, 2), dtype=np.complex128)
    cdef dc[:, ::1] ov = out
    cdef dc u[4]
    cdef dc e[4]
    cdef dc nxt[4]
    cdef Py_ssize_t k
    cdef int i
    u[0] = 1.0; u[1] = 0.0; u[2] = 0.0; u[3] = 1.0
    with nogil:
        for k in range(n):
            _segment_exp(
                s0 + f[k] * sc,
                b0[0] + f[k] * bc[0],
                b0[1] + f[k] * bc[1],
                b0[2] + f[k] * bc[2],
                dt,
                e,
            )
            _mm(e, u, nxt)
            for i in range(4):
                u[i] = nxt[i]
    ov[0, 0] = u[0]; ov[0, 1] = u[1]; ov[1, 0] = u[2]; ov[1, 1] = u[3]
    return out


cdef inline double _value_from_final(
    const dc* u, int mode, const dc* p1, const dc* p2
) nogil:
    cdef dc t1[4]
    cdef dc udag[4]
    cdef dc t2[4]
    cdef dc ty
    if mode == 0:
        udag[0] = u[0].conjugate(); udag[1] = u[2].conjugate()
        udag[2] = u[1].conjugate(); udag[3] = u[3].conjugate()
        _mm(u, p1, t1)
        _mm(t1, udag, t2)
        # Tr(t2 @ p2)
        return (
            t2[0] * p2[0] + t2[1] * p2[2] + t2[2] * p2[1] + t2[3] * p2[3]
        ).real
    ty = (
        p1[0].conjugate() * u[0]
        + p1[2].conjugate() * u[2]
        + p1[1].conjugate() * u[1]
        + p1[3].conjugate() * u[3]
    )
    return 0.25 * (ty.real * ty.real + ty.imag * ty.imag)


cdef inline void _adjoint_matrix(
    const dc* u, int mode, const dc* p1, const dc* p2, dc* x
) nogil:
    # X with dF[dU] = 2 Re Tr(X dU)
    cdef dc udag[4]
    cdef dc t1[4]
    cdef dc ty
    udag[0] = u[0].conjugate(); udag[1] = u[2].conjugate()
    udag[2] = u[1].conjugate(); udag[3] = u[3].conjugate()
    if mode == 0:
        _mm(p1, udag, t1)
        _mm(t1, p2, x)
        return
    ty = (
        p1[0].conjugate() * u[0]
        + p1[2].conjugate() * u[2]
        + p1[1].conjugate() * u[1]
        + p1[3].conjugate() * u[3]
    )
    # W^dag scaled by conj(Tr Y)/4
    x[0] = 0.25 * ty.conjugate() * p1[0].conjugate()
    x[1] = 0.25 * ty.conjugate() * p1[2].conjugate()
    x[2] = 0.25 * ty.conjugate() * p1[1].conjugate()
    x[3] = 0.25 * ty.conjugate() * p1[3].conjugate()


def objective_value(
    double s0, const double[::1] b0, double sc, const double[::1] bc,
    const double[::1] f, double dt, int mode,
    const dc[:, ::1] p1, const dc[:, ::1] p2
):
    cdef Py_ssize_t n = f.shape[0]
    cdef dc u[4]
    cdef dc e[4]
    cdef dc nxt[4]
    cdef dc q1[4]
    cdef dc q2[4]
    cdef Py_ssize_t k
    cdef int i
    cdef double out
    q1[0] = p1[0, 0]; q1[1] = p1[0, 1]; q1[2] = p1[1, 0]; q1[3] = p1[1, 1]
    q2[0] = p2[0, 0]; q2[1] = p2[0, 1]; q2[2] = p2[1, 0]; q2[3] = p2[1, 1]
    u[0] = 1.0; u[1] = 0.0; u[2] = 0.0; u[3] = 1.0
    with nogil:
        for k in range(n):
            _segment_exp(
                s0 + f[k] * sc,
                b0[0] + f[k] * bc[0],
                b0[1] + f[k] * bc[1],
                b0[2] + f[k] * bc[2],
                dt,
                e,
            )
            _mm(e, u, nxt)
            for i in range(4):
                u[i] = nxt[i]
        out = _value_from_final(u, mode, q1, q2)
    return out


def objective_value_and_grad(
    double s0, const double[::1] b0, double sc, const double[::1] bc,
    const double[::1] f, double dt, int mode,
    const dc[:, ::1] p1, const dc[:, ::1] p2, const dc[:, ::1] v_mat
):
    cdef Py_ssize_t n = f.shape[0]
    cdef cnp.ndarray grad = np.empty(n, dtype=np.float64)
    cdef double[::1] gv = grad
    cdef cnp.ndarray estore = np.empty((n, 2, 2), dtype=np.complex128)
    cdef dc[:, :, ::1] ev = estore
    cdef cnp.ndarray ustore = np.empty((n, 2, 2), dtype=np.complex128)
    cdef dc[:, :, ::1] uv = ustore  # U before segment k
    cdef dc u[4]
    cdef dc e[4]
    cdef dc nxt[4]
    cdef dc q1[4]
    cdef dc q2[4]
    cdef dc vloc[4]
    cdef dc x[4]
    cdef dc s[4]
    cdef dc d[4]
    cdef dc t1[4]
    cdef dc t2[4]
    cdef Py_ssize_t k
    cdef int i
    cdef double val
    q1[0] = p1[0, 0]; q1[1] = p1[0, 1]; q1[2] = p1[1, 0]; q1[3] = p1[1, 1]
    q2[0] = p2[0, 0]; q2[1] = p2[0, 1]; q2[2] = p2[1, 0]; q2[3] = p2[1, 1]
    vloc[0] = v_mat[0, 0]; vloc[1] = v_mat[0, 1]
    vloc[2] = v_mat[1, 0]; vloc[3] = v_mat[1, 1]
    u[0] = 1.0; u[1] = 0.0; u[2] = 0.0; u[3] = 1.0
    with nogil:
        for k in range(n):
            uv[k, 0, 0] = u[0]; uv[k, 0, 1] = u[1]
            uv[k, 1, 0] = u[2]; uv[k, 1, 1] = u[3]
            _segment_exp(
                s0 + f[k] * sc,
                b0[0] + f[k] * bc[0],
                b0[1] + f[k] * bc[1],
                b0[2] + f[k] * bc[2],
                dt,
                e,
            )
            ev[k, 0, 0] = e[0]; ev[k, 0, 1] = e[1]
            ev[k, 1, 0] = e[2]; ev[k, 1, 1] = e[3]
            _mm(e, u, nxt)
            for i in range(4):
                u[i] = nxt[i]
        val = _value_from_final(u, mode, q1, q2)
        _adjoint_matrix(u, mode, q1, q2, x)
        # backward suffix accumulation: S_k = X @ E_N @ ... @ E_(k+1)
        for i in range(4):
            s[i] = x[i]
        for k in range(n - 1, -1, -1):
            _segment_dexp(
                s0 + f[k] * sc,
                b0[0] + f[k] * bc[0],
                b0[1] + f[k] * bc[1],
                b0[2] + f[k] * bc[2],
                dt,
                vloc,
                d,
            )
            _mm(s, d, t1)
            t2[0] = uv[k, 0, 0]; t2[1] = uv[k, 0, 1]
            t2[2] = uv[k, 1, 0]; t2[3] = uv[k, 1, 1]
            # g_k = 2 Re Tr(t1 @ U_prev)
            gv[k] = 2.0 * (
                t1[0] * t2[0] + t1[1] * t2[2] + t1[2] * t2[1] + t1[3] * t2[3]
            ).real
            e[0] = ev[k, 0, 0]; e[1] = ev[k, 0, 1]
            e[2] = ev[k, 1, 0]; e[3] = ev[k, 1, 1]
            _mm(s, e, t1)
            for i in range(4):
                s[i] = t1[i]
    return val, grad
