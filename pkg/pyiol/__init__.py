"""
iol - incremental online learning for ensemble deep RVFL networks.
"""

from .settings import __version__, __snapshot_version__
from . import bench
from . import export
from . import features
from . import iol
from . import metrics
from . import preset
from . import regret
from . import stream

__all__ = [
    "__version__",
    "__snapshot_version__",
    "bench",
    "export",
    "features",
    "iol",
    "metrics",
    "preset",
    "regret",
    "stream",
]
