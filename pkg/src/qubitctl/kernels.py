"""Kernel backend selection: compiled Cython core with pure-Python fallback.

The compiled extension ``qubitctl._kernels_cy`` is preferred when importable.
Set the environment variable ``QUBITCTL_KERNELS`` to ``py`` to force the
NumPy fallback or ``cy`` to require the extension (ImportError if missing).
Both backends implement identical interfaces and agree to roundoff; see
``benchmarks/bench_kernels.py`` for a speed comparison.
"""
from __future__ import annotations

import os

from . import _kernels_py

_impl = _kernels_py

_requested = os.environ.get("QUBITCTL_KERNELS", "").strip().lower()
if _requested in {"py", "python"}:
    pass
else:
    try:
        from . import _kernels_cy as _impl_cy  # type: ignore[attr-defined]

        _impl = _impl_cy
    except ImportError:
        if _requested in {"cy", "compiled", "c"}:
            raise ImportError(
                "QUBITCTL_KERNELS requested the compiled backend but "
                "qubitctl._kernels_cy is not built; run "
                "`python setup.py build_ext --inplace` or reinstall."
            )

segment_unitaries = _impl.segment_unitaries
propagate_nodes = _impl.propagate_nodes
final_unitary = _impl.final_unitary
objective_value = _impl.objective_value
objective_value_and_grad = _impl.objective_value_and_grad


def backend() -> str:
    """Name of the active backend: 'compiled' or 'python'."""
    return _impl.BACKEND_NAME


def backends_available() -> tuple[str, ...]:
    """All importable backend names (the fallback is always present)."""
    names = ["python"]
    try:
        from . import _kernels_cy  # noqa: F401

        names.insert(0, "compiled")
    except ImportError:
        pass
    return tuple(names)
