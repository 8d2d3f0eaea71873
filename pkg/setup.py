"""Build script: compiles the A* kernel extension when a toolchain is present.

The extension is optional. If Cython or a C compiler is missing, installation
falls back to the pure-Python kernel (agnav._astar_py) selected at import time.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """build_ext that downgrades compile failures to a warning."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # no toolchain: pure-Python kernel is used
            print(f"warning: skipping C extension build ({exc})")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); "
                  "pure-Python kernel will be used")


def extensions():
    if os.environ.get("AGNAV_SKIP_EXT"):
        return []
    try:
        from Cython.Build import cythonize
        import numpy
    except ImportError:
        return []
    ext = Extension(
        "agnav._astar",
        sources=["src/agnav/_astar.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
