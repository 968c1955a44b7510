# Builds the optional compiled kernel. The package falls back to the pure
# Python implementation in proxibench._pykernels when the extension is absent.
# Floating-point contraction is disabled so the compiled kernels round exactly
# like the pure backend.
import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "proxibench._ckernels",
        ["src/proxibench/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
        },
    ),
)
