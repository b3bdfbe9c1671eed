import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# optional: a failed compile leaves the numpy fallback in place
ext_modules = cythonize(
    [Extension("synsq._kernels", ["src/synsq/_kernels.pyx"],
               include_dirs=[np.get_include()],
               define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
               extra_compile_args=["-O3"],
               optional=True)],
    compiler_directives={"language_level": "3"},
)

setup(ext_modules=ext_modules)
