"""Build script for the optional compiled AM kernel.

The package is fully functional without the extension: cqibeam.am falls
back to the pure-NumPy kernel when `cqibeam._am_kernel` is missing.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the Cython kernel if possible, otherwise install pure Python."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, Cython, ...
            print(f"warning: skipping compiled kernel ({exc}); "
                  "using pure-NumPy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc}); "
                  "using pure-NumPy fallback")


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "cqibeam._am_kernel",
        sources=["src/cqibeam/_am_kernel.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
