"""Build hook for the optional compiled kernels.

The package works without the extension (a pure-NumPy fallback is selected
at import time), so a missing Cython toolchain degrades the build instead
of failing it.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "camguide._kernels",
                ["src/camguide/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3", "-march=native"],
            )
        ],
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
