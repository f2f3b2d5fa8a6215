from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "fbmctrl._core",
    sources=[
        "src/fbm.cpp",
        "src/fcalc.cpp",
        "src/meanfield.cpp",
        "src/sdde.cpp",
        "src/adjoint.cpp",
        "src/control.cpp",
        "src/scenario.cpp",
        "python/src/bindings.cpp",
    ],
    include_dirs=["include", "vendor"],
    libraries=["fftw3"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
