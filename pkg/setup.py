"""Builds the compiled value-iteration kernel; the package falls back to
the numpy kernel at import time if the extension is unavailable."""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "gridlang.kernels._vi",
                ["src/gridlang/kernels/_vi.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
