# -*- coding: utf-8 -*-

from setuptools import setup, find_packages


setup(
    name="anbsak",
    version="0.2.0",
    description="Exact BDeu structure learning of augmented naive Bayes and Bayesian network classifiers",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=("tests", "tests.*")),
    python_requires=">=3.8",
    install_requires=[
        "matplotlib",
        "more-itertools",
        "numpy",
        "parameterized",
        "scipy",
    ],
    entry_points={"console_scripts": ["anbsak=anbsak.cli:main"]},
    classifiers=[
        # 'Development Status :: 5 - Production/Stable',
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        'License :: OSI Approved :: MIT License',
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: Implementation :: CPython",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
)
