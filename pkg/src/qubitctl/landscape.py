"""Landscape analysis: gradient flow, critical-point classification,
exceptional-control saddle checks, rank profiling and Monte-Carlo sweeps.

The sweeps exist to falsify, not to confirm: a ``TRAP_CANDIDATE`` verdict is
re-verified on a doubled grid with tightened tolerances before being
reported, and any survivor is attached to the report with its full control
vector and Hessian spectrum.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import partial
from typing import Sequence, Union

import numpy as np
import numpy.typing as npt

from . import kernels, mat2
from .dynamics import (
    COMMUTATOR_FLOOR,
    ControlGrid,
    HamiltonianPair,
    canonical_frame,
    nested_commutator,
    exceptional_control,
    min_time,
)
from .objectives import Objective, hessian, kinematic_range, l_functional, value_and_gradient

__all__ = [
    "HypothesisViolation",
    "OptimizerConfig",
    "RunStatus",
    "RunRecord",
    "ascend",
    "Tolerances",
    "PointKind",
    "ClassifiedPoint",
    "classify",
    "HarmonicWindow",
    "step_variation",
    "cos4_variation",
    "counterexample_variation",
    "variation_admissible",
    "second_order_response",
    "Verdict",
    "F0Report",
    "f0_second_order_report",
    "rank_profile",
    "random_pair",
    "random_control",
    "SweepConfig",
    "SweepRun",
    "Falsification",
    "SweepReport",
    "sweep",
    "pair_seed_for",
    "start_seed_for",
]


class HypothesisViolation(ValueError):
    """An analysis was invoked outside its guaranteed hypotheses
    (e.g. Tr V != 0, or a horizon below the minimal time)."""


# ---------------------------------------------------------------------------
# gradient flow
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OptimizerConfig:
    """Backtracking gradient ascent/descent parameters."""

    max_iters: int = 4000
    grad_tol: float = 1e-8
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    initial_step: float = 1.0
    direction: str = "ascend"

    def __post_init__(self) -> None:
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if self.initial_step <= 0.0 or self.grad_tol <= 0.0:
            raise ValueError("initial_step and grad_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.direction not in ("ascend", "descend"):
            raise ValueError("direction must be 'ascend' or 'descend'")

    @property
    def sign(self) -> float:
        return 1.0 if self.direction == "ascend" else -1.0


class RunStatus(Enum):
    CONVERGED = "converged"
    ITER_LIMIT = "iter_limit"
    STEP_UNDERFLOW = "step_underflow"


@dataclass
class RunRecord:
    """Outcome of one gradient-flow run."""

    initial: npt.NDArray[np.float64]
    final: npt.NDArray[np.float64]
    trace: npt.NDArray[np.float64]
    grad_norm: float
    status: RunStatus
    iterations: int


def ascend(
    obj: Objective,
    pair: HamiltonianPair,
    init: ControlGrid,
    config: OptimizerConfig | None = None,
) -> RunRecord:
    """Gradient flow with a backtracking Armijo line search.

    The trial step is seeded with a safeguarded Barzilai-Borwein length and
    contracted until the Armijo condition holds, so the recorded objective
    trace is monotone (non-decreasing when ascending).  Termination states
    are encoded in the returned status, never raised.
    """
    cfg = config or OptimizerConfig()
    sign = cfg.sign
    s0, b0, sc, bc = pair.split()
    mode, p1, p2 = obj._kernel_payload()
    dt = init.dt

    def val(arr: np.ndarray) -> float:
        return kernels.objective_value(s0, b0, sc, bc, arr, dt, mode, p1, p2)

    def val_grad(arr: np.ndarray) -> tuple[float, np.ndarray]:
        return kernels.objective_value_and_grad(
            s0, b0, sc, bc, arr, dt, mode, p1, p2, pair.v
        )

    f = init.values.astype(np.float64).copy()
    current, grad = val_grad(f)
    trace = [current]
    prev_f: np.ndarray | None = None
    prev_g: np.ndarray | None = None
    last_step = cfg.initial_step
    status = RunStatus.ITER_LIMIT
    iterations = 0

    for _ in range(cfg.max_iters):
        grad_inf = float(np.abs(grad).max())
        if grad_inf <= cfg.grad_tol:
            status = RunStatus.CONVERGED
            break
        direction = sign * grad
        gg = float(grad @ grad)
        step = _bb_trial_step(f, grad, prev_f, prev_g, sign, last_step, cfg)
        floor = 1e-18 * (1.0 + float(np.abs(f).max())) / max(grad_inf, 1e-300)
        eps_floor = 4.0 * np.finfo(np.float64).eps * max(1.0, abs(current))
        accepted = False
        new_grad = None
        while step > floor:
            candidate = f + step * direction
            cand_val = val(candidate)
            required = cfg.armijo_c * step * gg
            if required > eps_floor:
                if sign * (cand_val - current) >= required:
                    accepted = True
                    break
            else:
                # the Armijo increase is below float resolution of F: accept
                # non-decreasing steps, but only when the analytic gradient
                # (the termination quantity) strictly contracts, so the
                # iterates cannot bounce across the flat top forever
                if sign * (cand_val - current) >= 0.0:
                    _, g_try = val_grad(candidate)
                    if float(np.abs(g_try).max()) < grad_inf:
                        accepted = True
                        new_grad = g_try
                        break
            step *= cfg.backtrack_factor
        if not accepted:
            status = RunStatus.STEP_UNDERFLOW
            break
        prev_f, prev_g = f, grad
        f = candidate
        current = cand_val
        grad = new_grad if new_grad is not None else val_grad(f)[1]
        trace.append(current)
        last_step = step
        iterations += 1

    return RunRecord(
        initial=init.values.copy(),
        final=f,
        trace=np.asarray(trace),
        grad_norm=float(np.abs(grad).max()),
        status=status,
        iterations=iterations,
    )


def _bb_trial_step(
    f: np.ndarray,
    g: np.ndarray,
    prev_f: np.ndarray | None,
    prev_g: np.ndarray | None,
    sign: float,
    last_step: float,
    cfg: OptimizerConfig,
) -> float:
    if prev_f is None or prev_g is None:
        return cfg.initial_step
    df = f - prev_f
    dg = g - prev_g
    denom = -sign * float(df @ dg)
    if denom > 0.0:
        step = float(df @ df) / denom
        if math.isfinite(step) and step > 0.0:
            return float(np.clip(step, 1e-12, 1e12))
    # no usable curvature estimate: probe a slightly longer step than last time
    return last_step / cfg.backtrack_factor


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Tolerances:
    """Thresholds separating roundoff from genuine landscape features."""

    grad_tol: float = 1e-8
    value_tol: float = 1e-4
    spec_tol: float = 1e-5


class PointKind(Enum):
    GLOBAL_MAX = "global_max"
    GLOBAL_MIN = "global_min"
    SADDLE = "saddle"
    TRAP_CANDIDATE = "trap_candidate"
    SECOND_ORDER_TRAP_CANDIDATE = "second_order_trap_candidate"
    NON_CRITICAL = "non_critical"


@dataclass(frozen=True)
class ClassifiedPoint:
    kind: PointKind
    value: float
    grad_norm: float
    gap_to_max: float
    gap_to_min: float
    hess_min: float | None = None
    hess_max: float | None = None


def classify(
    obj: Objective,
    pair: HamiltonianPair,
    control: ControlGrid,
    tol: Tolerances | None = None,
    hessian_step: float | None = None,
) -> ClassifiedPoint:
    """Assign a critical-point verdict to a control.

    The Hessian is evaluated only when the gradient is below threshold and
    the value sits strictly between the kinematic extremes; eigenvalues
    within ``spec_tol`` of zero are treated as indeterminate, which maps the
    point to ``SECOND_ORDER_TRAP_CANDIDATE`` rather than a signed claim.
    """
    return _classify_full(obj, pair, control, tol, hessian_step)[0]


def _classify_full(
    obj: Objective,
    pair: HamiltonianPair,
    control: ControlGrid,
    tol: Tolerances | None = None,
    hessian_step: float | None = None,
) -> tuple[ClassifiedPoint, npt.NDArray[np.float64] | None]:
    t = tol or Tolerances()
    current, grad = value_and_gradient(obj, pair, control)
    grad_inf = float(np.abs(grad).max())
    rng = kinematic_range(obj)
    gap_max = rng.hi - current
    gap_min = current - rng.lo

    def point(kind: PointKind, hmin=None, hmax=None) -> ClassifiedPoint:
        return ClassifiedPoint(kind, current, grad_inf, gap_max, gap_min, hmin, hmax)

    if grad_inf > t.grad_tol:
        return point(PointKind.NON_CRITICAL), None
    if rng.degenerate or abs(gap_max) <= t.value_tol:
        return point(PointKind.GLOBAL_MAX), None
    if abs(gap_min) <= t.value_tol:
        return point(PointKind.GLOBAL_MIN), None
    hess = hessian(obj, pair, control, step=hessian_step)
    eigs = np.linalg.eigvalsh(hess)
    hmin, hmax = float(eigs[0]), float(eigs[-1])
    if hmax > t.spec_tol:
        kind = PointKind.SADDLE
    elif hmax < -t.spec_tol:
        kind = PointKind.TRAP_CANDIDATE
    else:
        kind = PointKind.SECOND_ORDER_TRAP_CANDIDATE
    return point(kind, hmin, hmax), hess


# ---------------------------------------------------------------------------
# admissible variations and the second-order functional
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HarmonicWindow:
    """cos_amp*cos(omega t) + sin_amp*sin(omega t) on [0, length], 0 beyond."""

    omega: float
    length: float
    cos_amp: float = 1.0
    sin_amp: float = 0.0

    def __call__(self, t: npt.ArrayLike) -> npt.NDArray[np.float64]:
        tt = np.asarray(t, dtype=np.float64)
        inside = (tt >= 0.0) & (tt <= self.length)
        vals = self.cos_amp * np.cos(self.omega * tt) + self.sin_amp * np.sin(self.omega * tt)
        return np.where(inside, vals, 0.0)

    def sample(self, n: int, total_time: float) -> npt.NDArray[np.float64]:
        """Midpoint samples on an n-segment grid covering [0, total_time]."""
        mid = (np.arange(int(n)) + 0.5) * (total_time / int(n))
        return self(mid)

    def scaled_to(self, time_scale: float) -> "HarmonicWindow":
        """Map a canonical-time variation g(tau) to original time:
        f(t) = time_scale * g(time_scale * t)."""
        s = float(time_scale)
        return HarmonicWindow(
            omega=self.omega * s,
            length=self.length / s,
            cos_amp=self.cos_amp * s,
            sin_amp=self.sin_amp * s,
        )

    def _exp_terms(self) -> list[tuple[complex, float]]:
        """Coefficients c_m with f(t) = sum_m c_m exp(i nu_m t)."""
        if self.omega == 0.0:
            return [(complex(self.cos_amp), 0.0)]
        half = 0.5 * complex(self.cos_amp, -self.sin_amp)
        return [(half, self.omega), (half.conjugate(), -self.omega)]


def step_variation() -> HarmonicWindow:
    """Characteristic function of [0, pi] (canonical time units)."""
    return HarmonicWindow(omega=0.0, length=math.pi)


def cos4_variation() -> HarmonicWindow:
    """cos(4t) on [0, pi] (canonical time units)."""
    return HarmonicWindow(omega=4.0, length=math.pi)


def counterexample_variation() -> HarmonicWindow:
    """Characteristic function of [0, pi/3]; fails admissibility."""
    return HarmonicWindow(omega=0.0, length=math.pi / 3.0)


def _phase_integral(gamma: float, a: float, b: float) -> complex:
    """Integral of exp(i gamma t) over [a, b]; branch-free via sinc."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return (b - a) * np.exp(1j * gamma * mid) * np.sinc(gamma * half / np.pi)


def _ramp_integral(beta: float, a: float, b: float) -> complex:
    """Integral of (t - a) exp(i beta t) over [a, b]."""
    length = b - a
    x = beta * length
    if abs(x) < 1e-6:
        series = length * length * (0.5 + 1j * x / 3.0 - x * x / 8.0 - 1j * x**3 / 30.0)
        return np.exp(1j * beta * a) * series
    val = np.exp(1j * x) * (length / (1j * beta) + 1.0 / beta**2) - 1.0 / beta**2
    return np.exp(1j * beta * a) * val


def _layered_integral(beta: float, alpha: float, a: float, b: float) -> complex:
    """J = int_a^b exp(i beta t) * (int_a^t exp(i alpha u) du) dt.

    Exact when alpha is exactly zero; callers pass exact frequency sums, so
    the small-|alpha| threshold only guards against user-supplied near-zeros.
    """
    if abs(alpha) * (b - a) < 1e-9:
        return _ramp_integral(beta, a, b)
    return (
        _phase_integral(alpha + beta, a, b)
        - np.exp(1j * alpha * a) * _phase_integral(beta, a, b)
    ) / (1j * alpha)


def _window_fourier_pair(delta: HarmonicWindow, horizon: float) -> tuple[complex, complex]:
    """(int f cos2t, int f sin2t) over [0, min(length, horizon)]."""
    upto = min(delta.length, horizon)
    plus = sum(c * _phase_integral(nu + 2.0, 0.0, upto) for c, nu in delta._exp_terms())
    minus = sum(c * _phase_integral(nu - 2.0, 0.0, upto) for c, nu in delta._exp_terms())
    return 0.5 * (plus + minus), (plus - minus) / 2j


def variation_admissible(
    delta: Union[npt.ArrayLike, HarmonicWindow], total_time: float
) -> bool:
    """True iff int f cos2t dt and int f sin2t dt both vanish.

    Both integrals are evaluated exactly (per-segment closed forms for
    sampled controls, exponential integrals for harmonic windows) and
    compared against the quadrature tolerance 1e-9 * ||delta||_1.  The
    horizon must reach pi in canonical time units.
    """
    if total_time < math.pi - 1e-12:
        raise HypothesisViolation("admissibility requires a horizon of at least pi")
    if isinstance(delta, HarmonicWindow):
        cos_part, sin_part = _window_fourier_pair(delta, total_time)
        upto = min(delta.length, total_time)
        l1 = float(np.abs(delta.sample(8192, upto)).mean() * upto)
        tol = 1e-9 * max(l1, 1e-300)
        return bool(abs(cos_part.real) <= tol and abs(sin_part.real) <= tol)
    vals = np.asarray(delta, dtype=np.float64)
    edges = np.linspace(0.0, total_time, vals.size + 1)
    sin_edges = np.sin(2.0 * edges)
    cos_edges = np.cos(2.0 * edges)
    cos_int = float(vals @ (sin_edges[1:] - sin_edges[:-1])) / 2.0
    sin_int = float(vals @ (cos_edges[:-1] - cos_edges[1:])) / 2.0
    l1 = float(np.abs(vals).sum() * (total_time / vals.size))
    tol = 1e-9 * max(l1, 1e-300)
    return abs(cos_int) <= tol and abs(sin_int) <= tol


def second_order_response(
    delta: Union[npt.ArrayLike, HarmonicWindow],
    v: float = 1.0,
    total_time: float | None = None,
    n_grid: int = 4096,
) -> float:
    """The second-order response I(delta) of an admissible variation:

        I = v^2 * int_0^T dt1 int_0^t1 dt2 delta(t1) delta(t2) sin 2(t1-t2).

    Harmonic windows are integrated by nested per-segment closed forms over
    an ``n_grid`` partition (exact, any grid); sampled piecewise-constant
    variations use the exact correlation formula for the sampled function,
    which converges to the continuum value at second order in the spacing.
    """
    if isinstance(delta, HarmonicWindow):
        upto = delta.length if total_time is None else min(delta.length, total_time)
        return v * v * _i_functional_window(delta, upto, n_grid)
    vals = np.asarray(delta, dtype=np.float64)
    if total_time is None:
        raise ValueError("total_time is required for sampled variations")
    return v * v * _i_functional_samples(vals, float(total_time))


def _i_functional_samples(vals: np.ndarray, total_time: float) -> float:
    # exact double integral of the piecewise-constant variation:
    # diagonal blocks give d/2 - sin(2d)/4, cross blocks sin^2(d) sin(2md)
    n = vals.size
    d = total_time / n
    total = (d / 2.0 - np.sin(2.0 * d) / 4.0) * float(vals @ vals)
    if n > 1:
        lags = np.arange(1, n)
        weights = np.sin(d) ** 2 * np.sin(2.0 * lags * d)
        corr = np.correlate(vals, vals, "full")[n:]
        total += float(weights @ corr)
    return total


def _i_functional_window(delta: HarmonicWindow, upto: float, n_grid: int) -> float:
    terms = delta._exp_terms()
    edges = np.linspace(0.0, upto, int(n_grid) + 1)
    run_c = 0.0 + 0.0j  # int_0^a f cos2t
    run_s = 0.0 + 0.0j  # int_0^a f sin2t
    total = 0.0 + 0.0j
    for a, b in zip(edges[:-1], edges[1:]):
        p_plus = sum(c * _phase_integral(nu + 2.0, a, b) for c, nu in terms)
        p_minus = sum(c * _phase_integral(nu - 2.0, a, b) for c, nu in terms)
        cross = 0.0 + 0.0j
        for cm, num in terms:
            for cn, nun in terms:
                cross += cm * cn * (
                    _layered_integral(num + 2.0, nun - 2.0, a, b)
                    - _layered_integral(num - 2.0, nun + 2.0, a, b)
                )
        q_minus = run_c - 1j * run_s
        q_plus = run_c + 1j * run_s
        total += (q_minus * p_plus - q_plus * p_minus + cross) / 2j
        run_c += 0.5 * (p_plus + p_minus)
        run_s += (p_plus - p_minus) / 2j
    return float(total.real)


# ---------------------------------------------------------------------------
# exceptional-control second-order report
# ---------------------------------------------------------------------------


class Verdict(Enum):
    SADDLE_CONFIRMED = "saddle_confirmed"
    CRITICAL_WITH_ZERO_LZ = "critical_with_zero_lz"
    NOT_CRITICAL = "not_critical"


@dataclass(frozen=True)
class F0Report:
    """Second-order behaviour of the objective at the exceptional control."""

    f0: float
    time_scale: float
    min_horizon: float
    horizon: float
    v: float
    v_z: float
    phi: float
    l_sigma_z: float
    base_value: float
    grad_per_time: float
    admissible: tuple[bool, bool]
    i_values: tuple[float, float]
    epsilons: tuple[float, ...]
    measured: npt.NDArray[np.float64]
    predicted: npt.NDArray[np.float64]
    verdict: Verdict


def f0_second_order_report(
    pair: HamiltonianPair,
    obj: Objective,
    epsilons: Sequence[float],
    n_segments: int = 2048,
    t_multiplier: float = 1.0,
    grad_tol: float = 1e-8,
    lz_tol: float = 1e-9,
    vz_tol: float = 1e-9,
) -> F0Report:
    """Probe the constant control f0 along the two admissible variations.

    Requires Tr V = 0 and a horizon of at least pi/time_scale.  The measured
    second differences D_k(eps) = F(f0 + eps*delta_k) - F(f0) are compared
    with the quadratic prediction eps^2 * I_k * L(sigma_z); a saddle is
    confirmed only when v_z = 0, L(sigma_z) != 0 and the two measured signs
    are opposite for every requested eps.
    """
    if abs(np.trace(pair.v)) > 1e-12:
        raise HypothesisViolation("the exceptional-control analysis requires Tr V = 0")
    if t_multiplier < 1.0 - 1e-12:
        raise HypothesisViolation("the horizon must be at least the minimal time")
    eps = tuple(float(e) for e in epsilons)
    f0 = exceptional_control(pair)
    frame = canonical_frame(pair)
    t_min = min_time(pair)
    horizon = t_multiplier * t_min
    base = ControlGrid.constant(f0, n_segments, horizon)

    u0 = mat2.expm_unitary(pair.hamiltonian(f0), horizon)  # exact, control constant
    l_z = l_functional(obj, u0, frame.from_frame(mat2.SIGMA_Z))
    _, grad = value_and_gradient(obj, pair, base)
    grad_per_time = float(np.abs(grad).max() / base.dt)

    canon_horizon = frame.time_scale * horizon
    variations = (step_variation(), cos4_variation())
    admissible = tuple(variation_admissible(w, canon_horizon) for w in variations)
    i_vals = tuple(second_order_response(w, v=frame.v) for w in variations)

    s0, b0, sc, bc = pair.split()
    mode, p1, p2 = obj._kernel_payload()

    def val(arr: np.ndarray) -> float:
        return kernels.objective_value(s0, b0, sc, bc, arr, base.dt, mode, p1, p2)

    # same evaluation path as the perturbed runs, so D(0) vanishes exactly
    base_value = val(base.values)

    measured = np.empty((2, len(eps)))
    predicted = np.empty((2, len(eps)))
    for k, window in enumerate(variations):
        bump = window.scaled_to(frame.time_scale).sample(n_segments, horizon)
        for j, e in enumerate(eps):
            measured[k, j] = val(base.values + e * bump) - base_value
            predicted[k, j] = e * e * i_vals[k] * l_z

    critical = grad_per_time <= grad_tol
    nonzero = [j for j, e in enumerate(eps) if e != 0.0]
    if not critical:
        verdict = Verdict.NOT_CRITICAL
    elif abs(frame.v_z) <= vz_tol and abs(l_z) > lz_tol:
        opposite = bool(
            nonzero and np.all(measured[0, nonzero] * measured[1, nonzero] < 0.0)
        )
        if not opposite:
            raise ArithmeticError(
                "opposite-sign second differences expected but not observed; "
                "the requested epsilons are outside the quadratic regime"
            )
        verdict = Verdict.SADDLE_CONFIRMED
    else:
        verdict = Verdict.CRITICAL_WITH_ZERO_LZ

    return F0Report(
        f0=f0,
        time_scale=frame.time_scale,
        min_horizon=t_min,
        horizon=horizon,
        v=frame.v,
        v_z=frame.v_z,
        phi=frame.phi,
        l_sigma_z=l_z,
        base_value=base_value,
        grad_per_time=grad_per_time,
        admissible=admissible,  # type: ignore[arg-type]
        i_values=i_vals,  # type: ignore[arg-type]
        epsilons=eps,
        measured=measured,
        predicted=predicted,
        verdict=verdict,
    )


# ---------------------------------------------------------------------------
# rank profile and random instances
# ---------------------------------------------------------------------------


def rank_profile(pair: HamiltonianPair, control: ControlGrid) -> list[int]:
    """Rank of the nested-commutator family at each node (left-limit control).

    The family is {I, V, [H0,V], [H0,[H0,V]] + f*[V,[H0,V]]} with f the
    node's control value.

    Unitary conjugation by the node propagators preserves rank, so the
    profile is computed directly on the unconjugated family.
    """
    comm = mat2.commutator(pair.h0, pair.v)
    base = [mat2.I2, pair.v, comm]
    ranks = []
    for k in range(control.n + 1):
        f_k = float(control.values[max(k - 1, 0)])
        ranks.append(mat2.complex_rank(base + [nested_commutator(pair, f_k)]))
    return ranks


REJECTION_CAP = 10_000


def random_pair(
    seed: int | np.random.SeedSequence,
    traceless: bool = False,
    comm_floor: float = 1e-3,
) -> HamiltonianPair:
    """Deterministic random pair with Pauli coefficients uniform in [-1, 1].

    Draws are rejected until ||[H0, V]|| >= comm_floor; the traceless flag
    zeroes Tr V exactly.
    """
    if comm_floor <= 0.0:
        raise ValueError("comm_floor must be positive")
    rng = np.random.default_rng(seed)
    for _ in range(REJECTION_CAP):
        h = rng.uniform(-1.0, 1.0, 4)
        w = rng.uniform(-1.0, 1.0, 4)
        if traceless:
            w[0] = 0.0
        h0 = mat2.pauli_compose(*h)
        v = mat2.pauli_compose(*w)
        norm = mat2.spectral_norm(mat2.commutator(h0, v))
        if norm >= comm_floor and norm > COMMUTATOR_FLOOR:
            return HamiltonianPair(h0, v, traceless=traceless)
    raise RuntimeError(f"no admissible pair after {REJECTION_CAP} draws")


def random_control(
    seed: int | np.random.SeedSequence, n: int, total_time: float, amplitude: float = 1.0
) -> ControlGrid:
    rng = np.random.default_rng(seed)
    return ControlGrid(total_time, rng.uniform(-amplitude, amplitude, int(n)))


def pair_seed_for(master_seed: int, pair_index: int) -> int:
    """Replayable per-pair seed derived by key splitting, so parallel and
    serial sweeps draw identical instances."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(1, pair_index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def start_seed_for(master_seed: int, pair_index: int, start_index: int) -> int:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(2, pair_index, start_index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# ---------------------------------------------------------------------------
# Monte-Carlo sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    objective: Objective
    n_pairs: int
    starts_per_pair: int
    n_segments: int
    t_multiplier: float = 2.0
    seed: int = 0
    traceless: bool = True
    comm_floor: float = 1e-3
    start_amplitude: float = 1.0
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    tolerances: Tolerances = field(default_factory=Tolerances)
    max_escapes: int = 4
    escape_step: float = 1e-2
    workers: int = 1
    keep_controls: bool = False

    def __post_init__(self) -> None:
        if self.n_pairs < 1 or self.starts_per_pair < 1 or self.n_segments < 1:
            raise ValueError("sweep sizes must be positive")
        if self.t_multiplier < 1.0:
            raise ValueError("the horizon multiplier must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be positive")


@dataclass(frozen=True)
class SweepRun:
    pair_index: int
    start_index: int
    pair_seed: int
    start_seed: int
    status: RunStatus
    iterations: int
    escapes: int
    final_value: float
    gap_to_max: float
    grad_norm: float
    hess_min: float | None
    hess_max: float | None
    kind: PointKind
    reverified: bool = False
    final_control: tuple[float, ...] | None = None
    total_time: float | None = None


@dataclass(frozen=True)
class Falsification:
    """A trap candidate that survived re-verification; attached in full so
    the claim can be checked independently."""

    pair_seed: int
    start_seed: int
    control: tuple[float, ...]
    total_time: float
    hessian_eigenvalues: tuple[float, ...]


@dataclass
class SweepReport:
    seed: int
    runs: list[SweepRun]
    kind_counts: dict[str, int]
    status_counts: dict[str, int]
    falsifications: list[Falsification]

    @property
    def n_runs(self) -> int:
        return len(self.runs)

    @property
    def trap_candidates(self) -> int:
        return self.kind_counts.get(PointKind.TRAP_CANDIDATE.value, 0)


def _escape_direction(hess: np.ndarray) -> np.ndarray:
    """Eigenvector of the most positive Hessian eigenvalue."""
    _, eigvecs = np.linalg.eigh(hess)
    return eigvecs[:, -1]


def _run_single(cfg: SweepConfig, task: tuple[int, int, int, int]):
    pair_index, start_index, pair_seed, start_seed = task
    pair = random_pair(pair_seed, traceless=cfg.traceless, comm_floor=cfg.comm_floor)
    horizon = cfg.t_multiplier * min_time(pair)
    init = random_control(start_seed, cfg.n_segments, horizon, cfg.start_amplitude)
    record = ascend(cfg.objective, pair, init, cfg.optimizer)
    control = init.with_values(record.final)
    point, hess = _classify_full(cfg.objective, pair, control, cfg.tolerances)

    escapes = 0
    escapable = {PointKind.SADDLE, PointKind.SECOND_ORDER_TRAP_CANDIDATE}
    while point.kind in escapable and hess is not None and escapes < cfg.max_escapes:
        direction = _escape_direction(hess)
        sign = cfg.optimizer.sign
        candidates = [
            control.values + cfg.escape_step * direction,
            control.values - cfg.escape_step * direction,
        ]
        def quality(vals):
            grid = control.with_values(vals)
            return sign * value_and_gradient(cfg.objective, pair, grid)[0]
        restart = max(candidates, key=quality)
        record = ascend(cfg.objective, pair, control.with_values(restart), cfg.optimizer)
        control = control.with_values(record.final)
        escapes += 1
        point, hess = _classify_full(cfg.objective, pair, control, cfg.tolerances)

    reverified = False
    falsification = None
    if point.kind is PointKind.TRAP_CANDIDATE:
        # never report a trap from a single resolution: double the grid and
        # tighten the indeterminate band before believing it
        reverified = True
        tighter = replace(cfg.tolerances, spec_tol=cfg.tolerances.spec_tol * 0.1)
        refined = control.refine(2)
        point2, hess2 = _classify_full(
            cfg.objective, pair, refined, tighter, hessian_step=1e-6
        )
        point = point2
        if point2.kind is PointKind.TRAP_CANDIDATE:
            eigs = tuple(float(x) for x in np.linalg.eigvalsh(hess2))
            falsification = Falsification(
                pair_seed=pair_seed,
                start_seed=start_seed,
                control=tuple(float(x) for x in control.values),
                total_time=horizon,
                hessian_eigenvalues=eigs,
            )

    run = SweepRun(
        pair_index=pair_index,
        start_index=start_index,
        pair_seed=pair_seed,
        start_seed=start_seed,
        status=record.status,
        iterations=record.iterations,
        escapes=escapes,
        final_value=point.value,
        gap_to_max=point.gap_to_max,
        grad_norm=point.grad_norm,
        hess_min=point.hess_min,
        hess_max=point.hess_max,
        kind=point.kind,
        reverified=reverified,
        final_control=(
            tuple(float(x) for x in control.values) if cfg.keep_controls else None
        ),
        total_time=horizon if cfg.keep_controls else None,
    )
    return run, falsification


def sweep(cfg: SweepConfig) -> SweepReport:
    """Run the full (pair x start) grid and aggregate verdicts.

    Fully reproducible from ``cfg.seed``: per-run seeds are derived by key
    splitting and results are merged in (pair, start) order, so the report
    is identical for any worker count.
    """
    tasks = [
        (i, j, pair_seed_for(cfg.seed, i), start_seed_for(cfg.seed, i, j))
        for i in range(cfg.n_pairs)
        for j in range(cfg.starts_per_pair)
    ]
    runner = partial(_run_single, cfg)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(runner, tasks, chunksize=8))
    else:
        outcomes = [runner(t) for t in tasks]

    outcomes.sort(key=lambda rf: (rf[0].pair_index, rf[0].start_index))
    runs = [r for r, _ in outcomes]
    falsifications = [f for _, f in outcomes if f is not None]
    kind_counts = Counter(r.kind.value for r in runs)
    status_counts = Counter(r.status.value for r in runs)
    return SweepReport(
        seed=cfg.seed,
        runs=runs,
        kind_counts=dict(kind_counts),
        status_counts=dict(status_counts),
        falsifications=falsifications,
    )
