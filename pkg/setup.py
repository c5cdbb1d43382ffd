"""Build script for the optional compiled kernel core.

The package is pure Python plus one optional Cython extension holding the
hot lattice-scan kernels.  Cython regenerates the C source when available;
otherwise the shipped _ckern.c is compiled directly.  If no C toolchain is
usable the extension is skipped and the numpy fallback in quantlat._kernels
is used.
"""

import os

from setuptools import Extension, setup

try:
    import numpy as np
except ImportError:
    np = None

PYX = os.path.join("src", "quantlat", "_kernels", "_ckern.pyx")
C_SRC = os.path.join("src", "quantlat", "_kernels", "_ckern.c")

extensions = []
if np is not None:
    try:
        from Cython.Build import cythonize

        extensions = cythonize(
            [
                Extension(
                    "quantlat._kernels._ckern",
                    [PYX],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                    optional=True,
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        if os.path.exists(C_SRC):
            extensions = [
                Extension(
                    "quantlat._kernels._ckern",
                    [C_SRC],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                    optional=True,
                )
            ]

setup(ext_modules=extensions)
