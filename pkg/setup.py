"""Build script for the optional compiled kernels.

The package is fully functional without the extension (a pure-numpy
backend is selected at import time); the Cython module only accelerates
the sparse matvec / factorization / triangular-solve inner loops.
"""
import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "gkbsaddle._accel._kernels",
        sources=["src/gkbsaddle/_accel/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        language_level=3,
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
)
