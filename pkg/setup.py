from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; the numpy kernels are used instead
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("ldrncode.gf._ckernels", ["src/ldrncode/gf/_ckernels.pyx"], extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
