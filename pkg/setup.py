"""Build script: compiles the optional fast kernels.

The package works without the compiled extension (a pure-Python/numpy
fallback is selected at import time), so a failed extension build is
tolerated rather than fatal.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "hdelta.kernels._ckern",
                ["src/hdelta/kernels/_ckern.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    print("Cython not available; building pure-Python hdelta only")

setup(ext_modules=ext_modules)
