import setuptools

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setuptools.setup(
    name="lfads",
    version="0.1.0",
    description=(
        "Latent factor analysis via dynamical systems: a sequential variational autoencoder "
        "for neural population data, with its own autodiff core, configuration runner "
        "and population-based training."
    ),
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(include=["lfads", "lfads.*"]),
    package_data={
        "lfads": ["py.typed"],
        "lfads.configs": ["*.yaml", "*/*.yaml", "*/*/*.yaml"],
    },
    python_requires=">=3.10",
    install_requires=[
        "cachetools~=5.5.0",
        "matplotlib>=3.7",
        "numpy>=1.24",
        "pandas>=2.0",
        "PyYAML>=6.0",
        "scikit-learn>=1.3",
        "scipy>=1.10",
    ],
    extras_require={
        "test": ["pytest>=7.4"],
    },
    entry_points={
        "console_scripts": ["lfads=lfads.cli:run"],
    },
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "Topic :: Scientific/Engineering :: Bio-Informatics",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Framework :: AsyncIO",
        "Environment :: Console",
    ],
    keywords="LFADS, neuroscience, variational autoencoder, RNN, latent dynamics, population-based training",
    license="MIT",
)
