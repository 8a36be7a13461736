from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "aelab._core",
                ["src/aelab/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-Python fallback kernels are selected at import time, so the
    # package works without Cython or a C compiler.
    extensions = []

setup(ext_modules=extensions)
