"""Build hook for the optional Cython edit-distance kernel.

The package works without it: ``speakerid.fuzzy`` falls back to the
pure-Python implementation when the extension is missing.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("SPEAKERID_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("speakerid._fuzzy_ext", ["src/speakerid/_fuzzy_ext.pyx"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
