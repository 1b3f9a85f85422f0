from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            # -ffp-contract=off: no fused multiply-adds, so the compiled
            # kernels round exactly like the numpy fallback.
            Extension(
                "qss._kernels",
                ["src/qss/_kernels.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-Python install: qss.kernels falls back to the numpy implementation.
    ext_modules = []

setup(ext_modules=ext_modules)
