import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # fallback module is used at runtime
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("edgetopo._kernels", ["src/edgetopo/_kernels.pyx"],
                   include_dirs=[np.get_include()], optional=True)],
        language_level=3,
    )

setup(ext_modules=ext_modules)
