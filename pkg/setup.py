"""Build script: compiles the optional Cython core.

The compiled module is an accelerator only; if Cython or a C compiler is
unavailable the package installs with the pure-Python kernels and
``fracfield.backend`` falls back automatically.  Set FRACFIELD_NO_EXT=1 to
skip the extension build on purpose.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("FRACFIELD_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext = Extension(
            "fracfield._fastkern",
            ["src/fracfield/_fastkern.pyx"],
            include_dirs=[np.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize([ext], language_level="3")
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
