"""Build script: compiles the optional C hash kernels.

The package works without the extension (a pure-Python fallback is selected
at import time), so a failed extension build downgrades to a warning instead
of aborting the install.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or toolchain missing
            print(f"warning: C kernel build failed ({exc}); "
                  "falling back to pure-Python kernels", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: building {ext.name} failed ({exc}); "
                  "falling back to pure-Python kernels", file=sys.stderr)


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython not available; skipping C kernels", file=sys.stderr)
        return []
    ext = Extension(
        "notarychain._kernels._ckernels",
        sources=["src/notarychain/_kernels/_ckernels.pyx"],
        libraries=["crypto"],  # OpenSSL, for SHA-256 in the nonce search
    )
    return cythonize([ext], language_level="3")


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
