from setuptools import setup, find_packages

setup(
    name="debian-pkgnet",
    version="1.0.0",
    description="Debianパッケージの依存・競合ネットワークを取り込み、モジュール構造・ヌルモデル比較・インストール過程シミュレーション・リリース間の進化を解析するCLIツール",
    author="Your Name",
    author_email="your.email@example.com",
    packages=find_packages(exclude=["tests", "tests.*"]),
    include_package_data=True,
    install_requires=[
        "pandas>=2.0.3",
        "numpy>=1.24.4",
        "scipy>=1.10.1",
        "joblib>=1.3.2",
        "networkx>=3.1",
        "python-debian>=0.1.49",
        "tomli>=2.0.1; python_version < '3.11'",
    ],
    extras_require={
        "test": [
            "pytest>=7.4.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "pkgnet=pkgnet.cli:main",
        ],
    },
    python_requires=">=3.8",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Topic :: Scientific/Engineering :: Information Analysis",
        "Topic :: System :: Software Distribution",
    ],
)
