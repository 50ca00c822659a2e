"""Build script: compiles the optional fast-kernel extension.

The package works without the extension (a pure-Python fallback is
selected at import time), so a missing Cython or C compiler only costs
speed, never functionality.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("cachecoder._gfcore", ["src/cachecoder/_gfcore.pyx"])],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
