"""Propagation, the exceptional control and the canonical frame."""
import numpy as np
import pytest

from qubitctl import mat2
from qubitctl.dynamics import (
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
from qubitctl.landscape import random_pair
from qubitctl.mat2 import I2, SIGMA_X, SIGMA_Y, SIGMA_Z


@pytest.fixture
def zx_pair():
    return HamiltonianPair(SIGMA_Z, SIGMA_X, traceless=True)


# ---------------------------------------------------------------- pair/grid


def test_pair_rejects_commuting():
    with pytest.raises(DegeneratePairError):
        HamiltonianPair(SIGMA_Z, 2.0 * SIGMA_Z)


def test_pair_rejects_non_hermitian():
    with pytest.raises(ValueError):
        HamiltonianPair(np.array([[0, 1], [0, 0]]), SIGMA_X)


def test_pair_traceless_flag_checked():
    with pytest.raises(ValueError):
        HamiltonianPair(SIGMA_Z, SIGMA_X + 0.5 * I2, traceless=True)
    HamiltonianPair(SIGMA_Z, SIGMA_X + 0.5 * I2)  # fine without the flag


def test_control_grid_validation():
    with pytest.raises(ValueError):
        ControlGrid(0.0, [1.0])
    with pytest.raises(ValueError):
        ControlGrid(1.0, [])
    with pytest.raises(ValueError):
        ControlGrid(1.0, [np.nan])
    grid = ControlGrid.constant(0.5, 4, 2.0)
    assert grid.n == 4 and grid.dt == 0.5


def test_trajectory_requires_exact_identity_start():
    u = np.array([mat2.expm_unitary(SIGMA_X, 0.1), I2])
    with pytest.raises(ValueError):
        Trajectory(u)


# ---------------------------------------------------------------- propagate


def test_free_rotation(zx_pair):
    traj = propagate(zx_pair, ControlGrid.constant(0.0, 16, np.pi))
    assert np.abs(traj.final + I2).max() < 1e-12


def test_rabi_oracle(zx_pair):
    rng = np.random.default_rng(10)
    for _ in range(50):
        f = rng.uniform(0.05, 3.0)
        horizon = rng.uniform(0.2, 8.0)
        traj = propagate(zx_pair, ControlGrid.constant(f, 32, horizon))
        prob = abs(traj.final[1, 0]) ** 2
        rabi = f**2 * np.sin(np.sqrt(1 + f**2) * horizon) ** 2 / (1 + f**2)
        assert abs(prob - rabi) < 1e-12


def test_unit_determinant(zx_pair):
    rng = np.random.default_rng(11)
    control = ControlGrid(3.0, rng.uniform(-2, 2, 20))
    traj = propagate(zx_pair, control)
    assert abs(abs(np.linalg.det(traj.final)) - 1.0) < 1e-10


def test_refinement_leaves_final_unitary(zx_pair):
    rng = np.random.default_rng(12)
    control = ControlGrid(2.5, rng.uniform(-1, 1, 8))
    u_coarse = propagate(zx_pair, control).final
    u_fine = propagate(zx_pair, control.refine(2)).final
    assert np.abs(u_coarse - u_fine).max() < 1e-12


def test_composition_of_half_intervals(zx_pair):
    rng = np.random.default_rng(13)
    values = rng.uniform(-1, 1, 10)
    full = propagate(zx_pair, ControlGrid(4.0, values)).final
    first = propagate(zx_pair, ControlGrid(2.0, values[:5])).final
    second = propagate(zx_pair, ControlGrid(2.0, values[5:])).final
    assert np.abs(full - second @ first).max() < 1e-12


# ---------------------------------------------------------------- Heisenberg


def test_heisenberg_identity_node(zx_pair):
    traj = propagate(zx_pair, ControlGrid.constant(0.0, 4, np.pi))
    assert np.abs(heisenberg_interaction(traj, zx_pair, 0) - SIGMA_X).max() < 1e-14


def test_heisenberg_quarter_period(zx_pair):
    # V_t = cos(2t) sx - sin(2t) sy, so t = pi/4 gives -sy
    traj = propagate(zx_pair, ControlGrid.constant(0.0, 4, np.pi))
    v_t = heisenberg_interaction(traj, zx_pair, 1)
    assert np.abs(v_t + SIGMA_Y).max() < 1e-12


def test_heisenberg_preserves_spectrum(zx_pair):
    rng = np.random.default_rng(14)
    control = ControlGrid(3.0, rng.uniform(-1, 1, 12))
    traj = propagate(zx_pair, control)
    ref = np.sort(np.linalg.eigvalsh(zx_pair.v))
    for k in range(traj.n_segments + 1):
        eigs = np.sort(np.linalg.eigvalsh(heisenberg_interaction(traj, zx_pair, k)))
        assert np.abs(eigs - ref).max() < 1e-12


def test_heisenberg_index_bounds(zx_pair):
    traj = propagate(zx_pair, ControlGrid.constant(0.0, 4, 1.0))
    with pytest.raises(IndexError):
        heisenberg_interaction(traj, zx_pair, 5)
    with pytest.raises(IndexError):
        heisenberg_interaction(traj, zx_pair, -1)


# ---------------------------------------------------------------- f0, E, T_min


def test_exceptional_control_zx(zx_pair):
    assert exceptional_control(zx_pair) == 0.0


def test_exceptional_control_shifted_pair():
    pair = HamiltonianPair(SIGMA_Z + SIGMA_X, SIGMA_X, traceless=True)
    assert abs(exceptional_control(pair) + 1.0) < 1e-14
    family = [I2, pair.v, mat2.commutator(pair.h0, pair.v), nested_commutator(pair, -1.0)]
    assert mat2.complex_rank(family) == 3


def test_exceptional_control_traceless_formula():
    for seed in range(30):
        pair = random_pair(seed, traceless=True)
        f0 = exceptional_control(pair)
        remark = -np.trace(pair.h0 @ pair.v).real / np.trace(pair.v @ pair.v).real
        assert abs(f0 - remark) < 1e-12


def test_rank_four_away_from_f0():
    for seed in range(30):
        pair = random_pair(seed + 1000, traceless=bool(seed % 2))
        f0 = exceptional_control(pair)
        comm = mat2.commutator(pair.h0, pair.v)
        for shift in (0.1, -0.1):
            family = [I2, pair.v, comm, nested_commutator(pair, f0 + shift)]
            assert mat2.complex_rank(family) == 4


def test_e_matrix_pauli_algebra(zx_pair):
    assert np.abs(nested_commutator(zx_pair, 0.0) - 4 * SIGMA_X).max() < 1e-14
    f = 0.73
    assert np.abs(nested_commutator(zx_pair, f) - (4 * SIGMA_X - 4 * f * SIGMA_Z)).max() < 1e-14


def test_e_matrix_traceless_and_hermitian():
    rng = np.random.default_rng(15)
    for seed in range(20):
        pair = random_pair(seed + 50)
        e = nested_commutator(pair, rng.uniform(-2, 2))
        assert abs(np.trace(e)) < 1e-12
        assert mat2.is_hermitian(e)


def test_min_time_examples(zx_pair):
    assert abs(min_time(zx_pair) - np.pi) < 1e-14
    doubled = HamiltonianPair(2 * SIGMA_Z, SIGMA_X, traceless=True)
    assert abs(min_time(doubled) - np.pi / 2) < 1e-14
    shifted = HamiltonianPair(SIGMA_Z + SIGMA_X, SIGMA_X, traceless=True)
    assert abs(min_time(shifted) - np.pi) < 1e-12


# ---------------------------------------------------------------- frame


def test_canonical_frame_already_canonical(zx_pair):
    frame = canonical_frame(zx_pair)
    assert abs(frame.time_scale - 1.0) < 1e-14
    assert abs(frame.v - 1.0) < 1e-14
    assert abs(frame.phi) < 1e-14
    assert abs(frame.v_z) < 1e-14 and abs(frame.v_0) < 1e-14


def test_canonical_frame_sigma_y_phase():
    pair = HamiltonianPair(SIGMA_Z, SIGMA_Y, traceless=True)
    frame = canonical_frame(pair)
    assert abs(frame.phi - np.pi / 2) < 1e-12


def test_canonical_frame_diagonalizes(zx_pair):
    for seed in range(100):
        pair = random_pair(seed + 300, traceless=bool(seed % 2))
        frame = canonical_frame(pair)
        f0 = exceptional_control(pair)
        h_eff = pair.h0 + f0 * pair.v
        traceless = h_eff - 0.5 * np.trace(h_eff).real * I2
        rotated = frame.to_frame(traceless)
        assert np.abs(rotated - frame.time_scale * SIGMA_Z).max() < 1e-10
        assert frame.v > 1e-9
        assert np.abs(frame.basis_change @ frame.basis_change.conj().T - I2).max() < 1e-12


def test_heisenberg_matches_canonical_closed_form():
    # at f = f0 the interaction picture is a rotation at rate 2*time_scale
    for seed in (3, 17, 40):
        pair = random_pair(seed, traceless=True)
        frame = canonical_frame(pair)
        f0 = exceptional_control(pair)
        horizon = 1.5 * min_time(pair)
        n = 24
        traj = propagate(pair, ControlGrid.constant(f0, n, horizon))
        for k in (0, 5, 13, n):
            t = k * horizon / n
            tau = frame.time_scale * t
            expected = (
                frame.v * np.cos(2 * tau - frame.phi) * SIGMA_X
                - frame.v * np.sin(2 * tau - frame.phi) * SIGMA_Y
                + frame.v_z * SIGMA_Z
                + frame.v_0 * I2
            )
            got = frame.to_frame(heisenberg_interaction(traj, pair, k))
            assert np.abs(got - expected).max() < 1e-10
