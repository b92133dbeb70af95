from setuptools import setup
from setuptools.extension import Extension

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# -ffp-contract=off: the compiled kernels must produce bit-identical doubles
# to the pure-Python fallback; FMA contraction would change rounding.
extensions = [
    Extension(
        "contactqsd._kernels",
        ["src/contactqsd/_kernels.pyx"],
        language="c++",
        extra_compile_args=["-O3", "-ffp-contract=off", "-std=c++11"],
    ),
]

if cythonize is not None:
    ext_modules = cythonize(extensions, language_level=3)
else:
    ext_modules = []

setup(ext_modules=ext_modules)
