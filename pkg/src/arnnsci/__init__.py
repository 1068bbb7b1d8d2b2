"""Auto-regressive-network-guided selected configuration interaction."""

from .determinant import Configuration, SymmetrySector, count_sector, enumerate_sector
from .driver import IterationRecord, RunConfig, RunResult, StageSpec, run
from .eigensolver import SparseState, fci_reference, lowest_eigenpair, n_ca
from .integrals import IntegralTable, load_fcidump, parse_fcidump, slater_condon

__version__ = "0.1.0"

__all__ = [
    "Configuration",
    "SymmetrySector",
    "count_sector",
    "enumerate_sector",
    "IterationRecord",
    "RunConfig",
    "RunResult",
    "StageSpec",
    "run",
    "SparseState",
    "fci_reference",
    "lowest_eigenpair",
    "n_ca",
    "IntegralTable",
    "load_fcidump",
    "parse_fcidump",
    "slater_condon",
]
