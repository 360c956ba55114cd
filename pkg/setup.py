import os

from setuptools import setup, find_packages


HERE = os.path.abspath(os.path.dirname(__file__))
PACKAGE = "pylocker"


def _read(*parts: str) -> str:
    with open(os.path.join(HERE, *parts), encoding="utf-8") as file:
        return file.read()


def _versionInfo() -> dict:
    info = {}
    exec(_read("src", PACKAGE, "version.py"), info)
    return info


def _requirements() -> list[str]:
    # setuptools is only needed at build time
    lines = (line.strip() for line in _read("requirements.txt").splitlines())
    return [line for line in lines if line and not line.startswith("#") and not line.startswith("setuptools")]


info = _versionInfo()

setup(
    name=info["PROJECT_NAME_TEXT"],
    version=info["VERSION"],
    author=info["AUTHOR"],
    author_email=info["AUTHOR_EMAIL"],
    description=info["DESCRIPTION"],
    long_description=_read("README.md"),
    long_description_content_type="text/markdown",
    url=info["URL"],
    package_dir={"": "src"},
    packages=find_packages(where="src", exclude=["tests", "tests.*"]),
    package_data={PACKAGE: ["*.conf"]},
    entry_points={"console_scripts": [f"{PACKAGE} = {PACKAGE}.cli:run"]},
    classifiers=[
        "Development Status :: 2 - Pre-Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.13",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    keywords="varying coefficient model, longitudinal data, asynchronous covariates, "
             "kernel weighting, irls, b-spline, scad, ebic",
    python_requires=">=3.10.0",
    install_requires=_requirements(),
)
