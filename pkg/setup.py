"""Build the optional compiled kernel extension.

The package works without the extension (a numpy fallback is selected at
import time); building it is strongly recommended for trajectory ensembles.
Requires fftw3 headers/library (libfftw3-dev) and a C compiler.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible; fall back to pure python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or fftw missing
            print(f"WARNING: compiled kernels not built ({exc}); "
                  "vactrap will use the pure-python backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"WARNING: failed to build {ext.name} ({exc}); "
                  "vactrap will use the pure-python backend")


def make_extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "vactrap._kernels._cy",
        ["src/vactrap/_kernels/_cy.pyx"],
        include_dirs=[numpy.get_include()],
        libraries=["fftw3"],
        # -fcx-limited-range avoids the __muldc3 libcall per complex multiply
        extra_compile_args=["-O3", "-march=native", "-fcx-limited-range"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=make_extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
