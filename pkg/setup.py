"""Builds the C pair-sum core; everything else lives in pyproject.toml."""
from setuptools import Extension, setup

setup(
    ext_modules=[
        Extension(
            "aggdiff._pairsums",
            sources=["src/aggdiff/_pairsums.c"],
            extra_compile_args=["-O3", "-march=native", "-ffast-math", "-funroll-loops"],
            libraries=["m"],
        )
    ]
)
