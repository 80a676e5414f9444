"""Build script for the optional compiled kernel.

The package works without the extension; ``gicreg.kernels`` falls back to a
numpy implementation when ``gicreg._ckernel`` cannot be imported.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("GICREG_NO_EXT", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "gicreg._ckernel",
                    ["src/gicreg/_ckernel.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
