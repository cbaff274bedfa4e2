"""Build the optional compiled planarity kernel.

Installing without Cython (or without a C compiler) still works; the package
then falls back to the pure-Python kernel at import time.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build-environment dependent
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "qcorrnet._lr_core",
                ["src/qcorrnet/_lr_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
