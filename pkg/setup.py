"""Build script for the optional compiled kernel backend.

The package is fully functional without the extension; when Cython or a
C compiler is unavailable the build falls back to the pure-NumPy kernels.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "sdirand._kernels._fast",
                ["src/sdirand/_kernels/_fast.pyx"],
                # Contraction off keeps leaf sums bit-compatible with
                # the NumPy fallback lane.
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
