from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "renormlab._renormlab",
    ["bindings/module.cpp", "src/contfrac.cpp", "src/io.cpp"],
    include_dirs=["include", "vendor"],
    libraries=["mpfr", "gmp"],
    cxx_std=20,
    extra_compile_args=["-O2"],
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
