"""Build script: compiles the optional Cython statevector kernel.

The package works without the extension (a pure-numpy fallback is selected at
import time), so a failed compile only costs speed, never correctness.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "chronoscope.kernels._pauli_cy",
                ["src/chronoscope/kernels/_pauli_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - depends on toolchain
    print(f"chronoscope: skipping compiled kernel ({exc}); pure-python fallback will be used")

setup(ext_modules=ext_modules)
