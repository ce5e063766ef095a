#!/usr/bin/env python
import pathlib
from setuptools import setup

from src._build_utils import *

ROOT_DIR = pathlib.Path(__file__).parent

metadata = read_metadata(ROOT_DIR)

say(f"\nBuilding {NAME} {metadata['version']}...")

setup(name=NAME,
      version=metadata['version'],
      author=metadata['author'],
      maintainer=metadata['maintainer'],
      description="Degree-fair unsupervised node embeddings with imparity metrics and experiment tooling",
      long_description=read_long_description(ROOT_DIR),
      long_description_content_type="text/markdown",
      classifiers=[
          metadata['status'],
          "Environment :: Console",
          "Intended Audience :: Science/Research",
          metadata['license'],
          "Natural Language :: English",
          "Operating System :: Unix",
          "Programming Language :: Python :: 3",
          "Topic :: Scientific/Engineering :: Artificial Intelligence",
          "Topic :: Scientific/Engineering :: Information Analysis"
      ],
      python_requires='>=3.9',
      packages=[NAME],
      package_dir={'': SRC_DIR},
      install_requires=["numpy>=1.22,<2", "scipy>=1.7.2,<2", "pandas>=2,<3",
                        "scikit-learn>=1.1", "tqdm>=4.60"],
      extras_require={'test': ["pytest>=7"]},
      entry_points={'console_scripts': [f"{NAME}={NAME}.cli:main"]}
      )
