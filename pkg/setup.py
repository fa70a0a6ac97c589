import os

import numpy as np
from setuptools import Extension, setup

# MODELSPARSE_NO_EXT=1 skips the compiled kernels; the package then runs on
# its pure-Python fallback.
ext_modules = []
if not os.environ.get("MODELSPARSE_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "modelsparse._ckernels",
                    ["src/modelsparse/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
