"""Build script: compiles the box-covering kernel if Cython is available.

The package is fully functional without the extension; box_cover falls back
to a NumPy implementation of the same kernel (see spinfractal._covercore_py).
"""

import warnings

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "spinfractal._covercore",
                ["src/spinfractal/_covercore.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    warnings.warn("Cython not available; building without the compiled covering kernel")
    extensions = []

setup(ext_modules=extensions)
