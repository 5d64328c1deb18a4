"""iol - setup.py"""
import re
import sys

import setuptools

if sys.version_info < (3, 7):
    print("error: pyiol requires Python 3.7 or greater.")
    quit(1)

LONG_DESC = open('README.md').read()
VERSION = re.search(r'__version__ = "(.+)"',
                    open('pyiol/settings.py').read()).group(1)

setuptools.setup(
    name="pyiol",
    version=VERSION,
    description="Incremental online learning for ensemble deep RVFL networks",
    long_description_content_type="text/markdown",
    long_description=LONG_DESC,
    keywords="online-learning rvfl recursive-least-squares regret",
    license="MIT",
    classifiers=[
        "License :: OSI Approved :: MIT License",
        "Operating System :: POSIX :: Linux",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    packages=["pyiol", "pyiol.scripts"],
    package_data={"pyiol": ["presets/*.json", "templates/*"]},
    entry_points={"console_scripts": ["iol=pyiol.__main__:main"]},
    install_requires=["numpy", "scipy", "pandas"],
    python_requires=">=3.7",
    test_suite="tests",
    include_package_data=True,
    zip_safe=False)
