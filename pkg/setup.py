"""Build script for the optional compiled iteration kernel.

The package works without the extension (a pure-Python loop is selected at
import time); the extension only accelerates the per-iteration hot loop.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "nsmlab._kernels",
                ["src/nsmlab/_kernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
