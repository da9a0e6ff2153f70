"""Sparse signal recovery with matching pursuit with tree pruning (TMP).

Subpackages and modules
-----------------------
linalg       least squares, projections and correlations on column subsets
signals      seeded instances, ERR/MSE metrics, instance CSV dumps
recovery     OMP, gOMP, CoSaMP, the Oracle, exhaustive l0 and TMP
analysis     brute-force restricted isometry constants and bound checks
bench        Monte-Carlo sweeps and diagnostics; ``cli`` wraps it
estimators   scikit-learn style estimators
"""

from .estimators import CoSaMPRecovery, GOMPRecovery, OMPRecovery, OracleRecovery, TMPRecovery
from .exceptions import TreePursuitError
from .recovery import TmpConfig, tmp
from .signals import make_instance

__version__ = "0.1.0"

__all__ = [
    "CoSaMPRecovery",
    "GOMPRecovery",
    "OMPRecovery",
    "OracleRecovery",
    "TMPRecovery",
    "TmpConfig",
    "TreePursuitError",
    "make_instance",
    "tmp",
]
