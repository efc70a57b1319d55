"""Build script for the compiled kernel extension.

The extension is compiled with -ffp-contract=off so its floating point
results stay bit-identical to the pure-Python fallback (no fused
multiply-adds).
"""

from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        "esrn_search._kernels._ckernels",
        ["src/esrn_search/_kernels/_ckernels.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(ext_modules=cythonize(extensions, language_level="3"))
