"""Build script for the optional compiled distance-transform kernel.

The package is fully functional without the extension (a pure NumPy/Python
fallback is selected at import time), so a failing C toolchain must not fail
the install: build errors demote the extension to a warning.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # toolchain missing entirely
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"WARNING: compiled kernel build failed ({exc}); "
            "falling back to the pure-Python distance transform",
            file=sys.stderr,
        )


def extensions():
    ext = Extension(
        "handstates._edtcore",
        sources=["src/handstates/_edtcore.pyx"],
        extra_compile_args=["-O3"],
    )
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
