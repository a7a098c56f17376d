from glob import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "combnet._combnet",
    sorted(glob("src/*.cpp")) + ["python/src/bindings.cpp"],
    include_dirs=["include", "vendor"],
    cxx_std=20,
    extra_compile_args=["-O3"],
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
