#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the pure-NumPy fallback.

Run from the repository root after building the extension:

    python benchmarks/bench_kernels.py [--repeats 200]

Reports per-call times for the three hot kernels and an end-to-end
gradient-ascent run, plus the compiled/python speedup.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from qubitctl import _kernels_py
from qubitctl.dynamics import ControlGrid, HamiltonianPair
from qubitctl.landscape import OptimizerConfig, ascend, random_control, random_pair
from qubitctl.mat2 import SIGMA_X, SIGMA_Z
from qubitctl.objectives import Gate, hadamard

try:
    from qubitctl import _kernels_cy
except ImportError:
    _kernels_cy = None


def _time(fn, repeats: int) -> float:
    fn()  # warm up
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def bench_kernels(repeats: int) -> None:
    pair = HamiltonianPair(SIGMA_Z, SIGMA_X, traceless=True)
    s0, b0, sc, bc = pair.split()
    rng = np.random.default_rng(0)
    w = hadamard()
    eye = np.eye(2, dtype=np.complex128)

    backends = [("python", _kernels_py)]
    if _kernels_cy is not None:
        backends.append(("compiled", _kernels_cy))

    print(f"{'kernel':<28}{'N':>6}" + "".join(f"{name:>14}" for name, _ in backends) + f"{'speedup':>10}")
    for n in (16, 64, 256, 1024):
        f = rng.uniform(-1.0, 1.0, n)
        dt = 2.0 * np.pi / n
        rows = {
            "objective_value": lambda mod, f=f, dt=dt: mod.objective_value(
                s0, b0, sc, bc, f, dt, 1, w, eye
            ),
            "objective_value_and_grad": lambda mod, f=f, dt=dt: mod.objective_value_and_grad(
                s0, b0, sc, bc, f, dt, 1, w, eye, pair.v
            ),
            "propagate_nodes": lambda mod, f=f, dt=dt: mod.propagate_nodes(
                s0, b0, sc, bc, f, dt
            ),
        }
        for label, call in rows.items():
            times = [_time(lambda m=mod: call(m), repeats) for _, mod in backends]
            speed = times[0] / times[-1] if len(times) > 1 else float("nan")
            cells = "".join(f"{t * 1e6:>11.1f} us" for t in times)
            print(f"{label:<28}{n:>6}{cells}{speed:>9.1f}x")


def bench_end_to_end(repeats: int) -> None:
    import os

    print("\nend-to-end gradient ascent (Hadamard gate, N=64, T=2*T_min):")
    pair = random_pair(11, traceless=True)
    from qubitctl.dynamics import min_time

    horizon = 2.0 * min_time(pair)
    init = random_control(5, 64, horizon)
    obj = Gate(hadamard())
    cfg = OptimizerConfig()

    import qubitctl.kernels as kernels

    record = ascend(obj, pair, init, cfg)
    per = _time(lambda: ascend(obj, pair, init, cfg), max(3, repeats // 40))
    print(
        f"  active backend {kernels.backend()}: {per * 1e3:.2f} ms/run "
        f"({record.iterations} iterations, status {record.status.value}); "
        f"force the fallback with QUBITCTL_KERNELS=py"
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()
    if _kernels_cy is None:
        print("compiled backend not built; showing python fallback only\n")
    bench_kernels(args.repeats)
    bench_end_to_end(args.repeats)


if __name__ == "__main__":
    main()
