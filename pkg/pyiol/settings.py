"""
iol - incremental online learning for ensemble deep RVFL networks.
"""

import os


__version__ = "1.0.0"
__snapshot_version__ = "1"


HOME = os.getenv("HOME", os.getenv("USERPROFILE"))
XDG_CACHE_DIR = os.getenv("XDG_CACHE_HOME", os.path.join(HOME, ".cache"))
XDG_CONF_DIR = os.getenv("XDG_CONFIG_HOME", os.path.join(HOME, ".config"))

CACHE_DIR = os.getenv("PYIOL_CACHE_DIR", os.path.join(XDG_CACHE_DIR, "iol"))
CONF_DIR = os.path.join(XDG_CONF_DIR, "iol")
DATA_DIR = os.getenv("PYIOL_DATA_DIR", os.path.join(CACHE_DIR, "datasets"))
MODULE_DIR = os.path.dirname(__file__)

DEFAULT_RNG = "PCG64"

# Numerical tolerances.
TOL_EQUIVALENCE = 1e-8
TOL_RATE = 1e-9
TOL_SMW = 1e-10
TOL_SYMMETRY = 1e-12
RCOND_WARN = 1e-12

# Relative tolerances for benchmark reproduction checks.
TOL_REPRODUCTION = 0.15
TOL_SIMULATION = 0.20
