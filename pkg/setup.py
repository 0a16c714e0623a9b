"""Build script. Compiles the optional Cython update kernels.

The compiled extension is a pure speedup: if Cython or a C compiler is
missing, the build falls back to installing the package without it and
the runtime uses the pure-Python kernels instead.
"""

import warnings

from setuptools import setup
from setuptools.command.build_ext import build_ext


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        warnings.warn("Cython not available; installing without compiled kernels")
        return []
    from setuptools import Extension

    ext = Extension(
        "switchmarl.kernels._speedups",
        sources=["src/switchmarl/kernels/_speedups.pyx"],
        # -ffp-contract=off keeps float results bit-identical to the
        # pure-Python kernels (no fused multiply-add).
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


class OptionalBuildExt(build_ext):
    """Build the extension if possible, otherwise continue without it."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            warnings.warn(f"compiled kernels skipped ({exc}); pure-Python fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"compiled kernels skipped ({exc}); pure-Python fallback will be used")


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
