"""Build the optional compiled billiard kernel.

The package works without it: ``desklab.billiard.backend`` falls back to the
pure-Python kernel when the extension is missing.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("DESKLAB_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "desklab.billiard._ckernels",
                    ["src/desklab/billiard/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    # no fast-math/contraction: results must match the Python kernel bit for bit
                    extra_compile_args=["-O2", "-ffp-contract=off", "-fno-fast-math"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
