import os

from setuptools import Extension, setup

# The compiled kernel is optional: set GRIDCAST_NO_EXT=1 to skip it and run on
# the pure-Python fallback (same arithmetic, selected at import).
ext_modules = []
if not os.environ.get("GRIDCAST_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "gridcast._kernels._core",
                    ["src/gridcast/_kernels/_core.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
