import numpy as np
from setuptools import Extension, setup
from Cython.Build import cythonize

# The compiled kernels are an optional speedup: if the extension cannot be
# built the package falls back to the pure-Python implementations selected
# at import time in barrierlab._native.
extensions = [
    Extension(
        "barrierlab._kernels",
        ["src/barrierlab/_kernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
)
