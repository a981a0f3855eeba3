from setuptools import setup, find_packages

setup(
    name="odp-check",
    version="0.1.0",
    description="Checker and animator for engineering-viewpoint models: DSL, conformance, dynamic schemas and channels",
    packages=find_packages(exclude=("tests", "tests.*")),
    python_requires=">=3.10",
    install_requires=[
        "pydantic>=2",
        "rich",
        "toml",
        "networkx",
    ],
    extras_require={
        "dev": ["pytest", "hypothesis", "jsonschema"],
        "yaml": ["pyyaml"],
    },
    entry_points={"console_scripts": ["odp-check=odpcheck.main:main"]},
    zip_safe=False,
    classifiers=[
        "Programming Language :: Python :: 3.10",
        "Operating System :: Microsoft :: Windows",
        "Operating System :: POSIX :: Linux",
        "Operating System :: MacOS",
    ],
)
