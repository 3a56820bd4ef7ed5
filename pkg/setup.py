"""Build the optional Cython kernels.

The compiled module is an accelerator only; if it cannot be built the package
installs without it and :mod:`heckepair._backend` falls back to numpy.
"""
import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("HECKEPAIR_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "heckepair._ckernels",
                    ["src/heckepair/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except Exception as exc:  # pragma: no cover - build environment dependent
        print(f"warning: building without compiled kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
