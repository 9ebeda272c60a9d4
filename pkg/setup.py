"""Build script: compiles the hot simulation core as a C extension when
Cython is available.  The package works without the extension; the pure
Python source of ``repeaterlab._engine_impl`` is used as a fallback."""

from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/repeaterlab/_engine_impl.py"],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
