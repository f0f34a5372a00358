"""Build script for the optional compiled kernel.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); building it just speeds up the coarse peak search
and ambiguity surfaces.  Compile in place with:

    python setup.py build_ext --inplace

or simply `pip install -e . --no-build-isolation`, which builds it when
Cython and a C compiler are available.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "ddsense._kernels._core",
                ["src/ddsense/_kernels/_core.pyx"],
                # reassociation (-ffast-math) lets the compiler vectorize the
                # inner reductions; kernel inputs are always finite and the
                # backend-parity tests pin the accuracy.  -march=native is
                # safe for an in-place build of this repo.
                extra_compile_args=["-O3", "-ffast-math", "-march=native"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
