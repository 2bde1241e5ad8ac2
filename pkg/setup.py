"""Build script for the optional compiled LDL^T kernel.

The extension is optional: if Cython or a C compiler is unavailable the
package still installs and falls back to the numpy implementation.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("GRAINSPEC_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "grainspec.eigensolve._ldlt_ext",
                    ["src/grainspec/eigensolve/_ldlt_ext.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )

setup(ext_modules=ext_modules)
