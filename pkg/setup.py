"""Build script: compiles the optional Cython kernel extension.

Set QUBITCTL_NO_EXT=1 to skip the extension entirely; the package then
runs on the pure-NumPy kernel fallback selected at import time.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("QUBITCTL_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "qubitctl._kernels_cy",
                    ["src/qubitctl/_kernels_cy.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level="3",
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
