"""Setup configuration for detectbench."""

from setuptools import setup, find_packages

setup(
    name="detectbench",
    version="0.1.0",
    description="Fault-injection harness comparing DMR, R-SMT and ParDet error detection",
    author="Loic",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "python-dotenv>=1.0.0",
        "click>=8.1.7",
        "rich>=13.7.0",
        "pydantic>=2.5.0",
        "numpy>=1.24.0",
        "scipy>=1.10.0",
    ],
    extras_require={
        "test": ["pytest>=7.4.0"],
    },
    entry_points={
        "console_scripts": [
            "detectbench=detectbench.cli:main",
        ],
    },
    python_requires=">=3.9",
)
