from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "fairpath._kernels._ckernels",
                ["src/fairpath/_kernels/_ckernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # no Cython: install with the pure-python kernel backend
    extensions = []

for ext in extensions:
    ext.optional = True  # a failed compile degrades to the python backend

setup(ext_modules=extensions)
