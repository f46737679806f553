#!/usr/bin/env python

from setuptools import find_packages, setup


setup(
    name="encrypto",
    version="0.1.0",
    package_dir={"": "src/python"},
    packages=find_packages(where="src/python"),
    py_modules=["detritus"],
    python_requires=">=3.8",
    install_requires=[
        "Jinja2>=2.9.6",
        "PyYAML>=3.12",
        "colorlog>=3.0.1",
        "numpy>=1.17",
        "progressbar2>=3.0",
        "scipy>=1.3",
    ],
    extras_require={"test": ["pytest>=7.0"]},
    entry_points={"console_scripts": ["encrypto=encrypto.cli:entry"]},
)
