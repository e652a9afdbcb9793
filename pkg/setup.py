"""Build script for the optional compiled kernel.

The package is fully functional without the extension; the simulation
engine falls back to the pure-Python kernel when the import fails.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the speedup extension, but never fail the install over it."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - toolchain dependent
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - toolchain dependent
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        sys.stderr.write(
            "warning: compiled kernel build failed (%s); "
            "installing with the pure-Python kernel only\n" % (exc,)
        )


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:  # pragma: no cover - build environment dependent
        return []
    if sys.platform == "win32":  # pragma: no cover - not exercised in CI
        fp_flags = ["/fp:strict"]
    else:
        # forbid fused multiply-add so results match the pure kernel bitwise
        fp_flags = ["-ffp-contract=off"]
    ext = Extension(
        "wiredrive.kernel._speedups",
        sources=["src/wiredrive/kernel/_speedups.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=fp_flags,
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
