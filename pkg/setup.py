from setuptools import setup, Extension

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; kernels.py falls back
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("expray._kernels", sources=["src/expray/_kernels.pyx"], extra_compile_args=["-O3"])],
        compiler_directives={"language_level": 3, "embedsignature": True},
    )

setup(ext_modules=ext_modules)
