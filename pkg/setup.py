"""Build script: compiles the optional C extension for the hot kernels.

The package works without the extension (a pure-numpy fallback is selected
at import time), so the extension is marked optional and a failed compile
does not abort installation.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "symscene._kernels",
                ["src/symscene/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
