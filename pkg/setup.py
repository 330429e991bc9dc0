"""Build script for the optional compiled kernel extension.

The package works without the extension: reminderbot.nn falls back to the
pure-numpy kernels when the compiled module is missing (see
reminderbot/nn/__init__.py). Building with Cython installed produces the
fast path used by training and decoding.
"""

import os

from setuptools import Extension, setup

PYX = os.path.join("src", "reminderbot", "nn", "_kernels_cy.pyx")

ext_modules = []
if os.path.exists(PYX):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "reminderbot.nn._kernels_cy",
                    [PYX],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
