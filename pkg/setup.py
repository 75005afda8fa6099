"""Build script for the optional compiled kernels.

The package works without the extension (a pure-Python fallback is selected
at import time), so the extension is marked optional: a failing C build must
not fail the install.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "prosim._kernels._ckernels",
                ["src/prosim/_kernels/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
