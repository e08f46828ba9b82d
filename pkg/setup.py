"""Build script for the optional compiled kernel extension.

The package works without the extension: ``irsmin._kernels`` falls back to a
pure-NumPy implementation when ``irsmin._kernels._cyloops`` cannot be
imported.  A failed C build therefore degrades the install instead of
breaking it.
"""

import numpy
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible; warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        import warnings

        warnings.warn(
            f"compiled kernels not built ({exc}); "
            "falling back to the pure-NumPy implementation"
        )


extensions = [
    Extension(
        "irsmin._kernels._cyloops",
        ["src/irsmin/_kernels/_cyloops.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
    )
]

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        extensions,
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
