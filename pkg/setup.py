"""Build script: compiles the optional Cython Monte Carlo kernel.

The package is fully functional without the extension (a pure-numpy
fallback is selected at import time), so a failed extension build is
downgraded to a warning rather than an install failure.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext = Extension(
        "fracibnr._mc_core",
        ["src/fracibnr/_mc_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], language_level=3)
except Exception as exc:  # pragma: no cover - build environment dependent
    warnings.warn(f"Cython MC kernel not built ({exc}); using pure-python fallback")

setup(ext_modules=ext_modules)
