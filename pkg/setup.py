import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# -ffp-contract=off: the compiled kernels must stay bit-identical to the
# numpy fallback, so fused multiply-add contraction is disabled.
ext = Extension(
    "lldet.tensor._convkernels",
    ["src/lldet/tensor/_convkernels.pyx"],
    include_dirs=[np.get_include()],
    extra_compile_args=["-O3", "-ffp-contract=off"],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(ext_modules=cythonize([ext], compiler_directives={"language_level": 3}))
