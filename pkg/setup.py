from setuptools import setup, find_packages

setup(
    name="gibbsdyn",
    version="0.1.0",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    install_requires=[
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "pandas>=2.0.0",
        "pydantic>=2.4.0",
        "ruamel.yaml>=0.17.0",
        "fastapi>=0.104.0",
        "uvicorn>=0.24.0",
    ],
    extras_require={
        "test": ["pytest>=7.0.0", "httpx>=0.25.0"],
    },
    entry_points={
        "console_scripts": ["gibbsdyn=gibbsdyn.main:main"],
    },
    python_requires=">=3.8",
)
