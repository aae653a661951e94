#!/usr/bin/env python
# -*- coding: utf-8 -*-
import os

# Copyright 2026 The forkbound authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

from setuptools import setup, find_packages

HERE = os.path.dirname(__file__)
README = open(os.path.join(HERE, "README.rst")).read()
VERSION = open(os.path.join(HERE, "VERSION.txt")).read().strip()

setup(
    name="forkbound",
    version=VERSION,
    description="Stochastic delay bounds and simulation for fork-join systems",
    license="Apache License 2.0",
    author="The forkbound authors",
    keywords="queueing, fork-join, split-merge, delay bounds, martingales, simulation",
    python_requires=">=3.8",
    install_requires=["numpy>=1.17", "scipy>=1.4"],
    include_package_data=True,
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    test_suite="tests",
    entry_points={
        'console_scripts': [
            'forkbound = forkbound.command:command',
        ]
    },
    long_description=README,
    classifiers=[
        'License :: OSI Approved :: Apache Software License',
        'Development Status :: 4 - Beta',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'Natural Language :: English',
        'Operating System :: OS Independent',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Topic :: System :: Distributed Computing',
    ]
)
