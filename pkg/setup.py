"""Build the optional compiled kernels; the package works without them."""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("HRMAP_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("hrmap._ckernels", ["src/hrmap/_ckernels.pyx"], extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
