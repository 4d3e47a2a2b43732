"""Backend parity: the compiled core and the NumPy fallback must agree."""
import numpy as np
import pytest

from qubitctl import _kernels_py, kernels, mat2

try:
    from qubitctl import _kernels_cy
except ImportError:
    _kernels_cy = None

needs_compiled = pytest.mark.skipif(
    _kernels_cy is None, reason="compiled kernel extension not built"
)


def _random_instance(rng):
    s0, sc = rng.uniform(-1, 1, 2)
    b0 = rng.uniform(-1, 1, 3)
    bc = rng.uniform(-1, 1, 3)
    n = int(rng.integers(1, 48))
    f = rng.uniform(-2.0, 2.0, n)
    dt = rng.uniform(0.02, 0.6)
    v = mat2.pauli_compose(sc, *bc)
    if rng.integers(0, 2) == 0:
        bloch = rng.normal(size=3)
        bloch *= rng.uniform(0.1, 0.9) / np.linalg.norm(bloch)
        p1 = mat2.pauli_compose(0.5, *(0.5 * bloch))
        p2 = mat2.pauli_compose(*rng.uniform(-1, 1, 4))
        mode = 0
    else:
        p1 = mat2.expm_unitary(mat2.pauli_compose(*rng.uniform(-1, 1, 4)), rng.uniform(0.1, 2))
        p2 = np.eye(2, dtype=np.complex128)
        mode = 1
    return s0, b0, sc, bc, f, dt, mode, p1, p2, v


def test_backend_reported():
    assert kernels.backend() in {"python", "compiled"}
    assert "python" in kernels.backends_available()


def test_python_nodes_start_with_exact_identity():
    rng = np.random.default_rng(0)
    s0, b0, sc, bc, f, dt, *_ = _random_instance(rng)
    nodes = _kernels_py.propagate_nodes(s0, b0, sc, bc, f, dt)
    assert np.abs(nodes[0] - np.eye(2)).max() == 0.0


@needs_compiled
def test_compiled_nodes_start_with_exact_identity():
    rng = np.random.default_rng(0)
    s0, b0, sc, bc, f, dt, *_ = _random_instance(rng)
    nodes = _kernels_cy.propagate_nodes(s0, b0, sc, bc, f, dt)
    assert np.abs(nodes[0] - np.eye(2)).max() == 0.0


@needs_compiled
def test_parity_propagation_and_values():
    rng = np.random.default_rng(1)
    for _ in range(100):
        s0, b0, sc, bc, f, dt, mode, p1, p2, v = _random_instance(rng)
        nodes_py = _kernels_py.propagate_nodes(s0, b0, sc, bc, f, dt)
        nodes_cy = _kernels_cy.propagate_nodes(s0, b0, sc, bc, f, dt)
        assert np.abs(nodes_py - nodes_cy).max() < 1e-13
        fin_py = _kernels_py.final_unitary(s0, b0, sc, bc, f, dt)
        fin_cy = _kernels_cy.final_unitary(s0, b0, sc, bc, f, dt)
        assert np.abs(fin_py - fin_cy).max() < 1e-13
        val_py = _kernels_py.objective_value(s0, b0, sc, bc, f, dt, mode, p1, p2)
        val_cy = _kernels_cy.objective_value(s0, b0, sc, bc, f, dt, mode, p1, p2)
        assert abs(val_py - val_cy) < 1e-13


@needs_compiled
def test_parity_gradients():
    rng = np.random.default_rng(2)
    for _ in range(100):
        s0, b0, sc, bc, f, dt, mode, p1, p2, v = _random_instance(rng)
        val_py, g_py = _kernels_py.objective_value_and_grad(
            s0, b0, sc, bc, f, dt, mode, p1, p2, v
        )
        val_cy, g_cy = _kernels_cy.objective_value_and_grad(
            s0, b0, sc, bc, f, dt, mode, p1, p2, v
        )
        assert abs(val_py - val_cy) < 1e-13
        scale = max(np.abs(g_py).max(), 1e-12)
        assert np.abs(g_py - g_cy).max() / scale < 1e-12


@needs_compiled
def test_parity_accepts_readonly_inputs():
    rng = np.random.default_rng(3)
    s0, b0, sc, bc, f, dt, mode, p1, p2, v = _random_instance(rng)
    for arr in (b0, bc, f, p1, p2, v):
        arr.setflags(write=False)
    _kernels_cy.objective_value_and_grad(s0, b0, sc, bc, f, dt, mode, p1, p2, v)
    _kernels_cy.objective_value(s0, b0, sc, bc, f, dt, mode, p1, p2)


def test_segment_unitaries_are_unitary():
    rng = np.random.default_rng(4)
    s0, b0, sc, bc, f, dt, *_ = _random_instance(rng)
    for impl in filter(None, (_kernels_py, _kernels_cy)):
        e = impl.segment_unitaries(s0, b0, sc, bc, f, dt)
        dev = np.abs(np.matmul(e.conj().transpose(0, 2, 1), e) - np.eye(2)).max()
        assert dev < 1e-13
