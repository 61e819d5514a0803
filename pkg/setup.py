import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "lemmaseq.nn._lstm_ext",
        ["src/lemmaseq/nn/_lstm_ext.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -ffast-math at compile time only: linking with it would pull in
        # crtfastmath.o and flip denormal handling for the whole process
        extra_compile_args=["-O3", "-ffast-math"],
        extra_link_args=["-lmvec", "-lm"],
    )
]

setup(ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}))
