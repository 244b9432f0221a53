"""Build hook for the optional compiled voting kernel.

``pip install -e . --no-build-isolation`` compiles the Cython kernel in
``src/quorum/_kernels/_core.pyx`` when Cython and a C toolchain are present.
If compilation is impossible the install still succeeds and the package
falls back to the pure-Python kernel at import time (see
``quorum._kernels``).
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Treat extension build failures as a soft warning, not an error."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: compiled kernel skipped ({exc}); "
                  "pure-Python fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: building {ext.name} failed ({exc}); "
                  "pure-Python fallback will be used")


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        [
            Extension(
                "quorum._kernels._core",
                ["src/quorum/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
