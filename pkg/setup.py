from setuptools import Extension, setup

# The compiled extension is optional: if Cython (or a C compiler) is missing
# the package falls back to the pure-Python kernels in hawkes._kernels.ref.
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "hawkes._kernels.native",
                ["src/hawkes/_kernels/native.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
