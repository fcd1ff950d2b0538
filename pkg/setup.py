"""Build script for the optional compiled evaluation core.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); set TORICDIST_NO_EXT=1 to skip compilation.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("TORICDIST_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize

        directives = {
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        }
        ext_modules = cythonize(
            [
                Extension(
                    "toricdist._core",
                    sources=[os.path.join("src", "toricdist", "_core.pyx")],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level="3",
            compiler_directives=directives,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
