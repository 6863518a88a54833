import sys

from setuptools import Extension, setup

# The compiled kernels are optional: without Cython (or without a C
# compiler) the package installs pure-Python and rnnbench.kernels falls
# back automatically.  -ffp-contract=off keeps the C arithmetic
# bit-identical to the pure-Python fallback (no FMA contraction).
ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "rnnbench._kernels_cy",
                ["src/rnnbench/_kernels_cy.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level="3",
    )
except ImportError:
    sys.stderr.write("Cython not found; building rnnbench without compiled kernels\n")

setup(ext_modules=ext_modules)
