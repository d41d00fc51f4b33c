#!/usr/bin/env python3

from setuptools import setup
from setuptools import find_packages


setup(
    name="buzzscope",
    version="0.1.0",
    description="Foraging buzz detection from whale accelerometer and depth data",
    test_suite="test",
    license="BSD",
    python_requires="~=3.8",
    install_requires=[
        "numpy",
        "scipy",
        "pandas",
        "scikit-learn",
        "joblib",
    ],
    packages=find_packages(exclude=("test*", "sim*", "doc*", "examples*")),
    include_package_data=True,
    entry_points={
        "console_scripts": [
            "buzzscope_cli=buzzscope.software.buzzscope_cli:main",
        ],
    },
)
