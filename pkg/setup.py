"""Builds the optional compiled kernel; the package works without it."""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        [Extension("friedrichs._kernels_c", ["src/friedrichs/_kernels_c.pyx"],
                   include_dirs=[np.get_include()],
                   define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                   # plain complex multiply/divide instead of the C99 NaN-safe helpers
                   extra_compile_args=["-O3", "-fcx-limited-range"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
