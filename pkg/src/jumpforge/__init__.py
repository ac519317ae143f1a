"""jumpforge: quantum computation driven by monitored spontaneous emission.

Stochastic wavefunction (quantum-jump) simulation where every gate is a
detector click: polarizing beam splitters erase which-process information to
turn decay into local bit flips, beam splitters erase which-qubit information
to turn pairs of flips into entangling two-qubit jumps, and the classical
record of clicks fixes the Pauli/phase corrections that complete
teleportation and graph-state generation.
"""

__version__ = "0.1.0"

from .errors import (
    AccuracyError,
    AnnihilationError,
    ConfigurationError,
    ErasureMismatchError,
    IntegrityError,
    JumpforgeError,
    LogCorruptionError,
    ProtocolIncompleteError,
    SamplerConsistencyError,
    UnsupportedConfigurationError,
)
from .qstate import StateVector, basis_state, fidelity
from .channels import JumpChannel, OpticalLayout, bs_combine, pbs_erase
from .trajectory import RngStream, TrajectoryLog, run
from .protocols import (
    GraphSpec,
    graph_correction,
    graph_script,
    pauli_correction,
    teleport_script,
)
from .stabilizer import StabilizerTableau

__all__ = [
    "__version__",
    "AccuracyError",
    "AnnihilationError",
    "ConfigurationError",
    "ErasureMismatchError",
    "IntegrityError",
    "JumpforgeError",
    "LogCorruptionError",
    "ProtocolIncompleteError",
    "SamplerConsistencyError",
    "UnsupportedConfigurationError",
    "StateVector",
    "basis_state",
    "fidelity",
    "JumpChannel",
    "OpticalLayout",
    "bs_combine",
    "pbs_erase",
    "RngStream",
    "TrajectoryLog",
    "run",
    "GraphSpec",
    "graph_correction",
    "graph_script",
    "pauli_correction",
    "teleport_script",
    "StabilizerTableau",
]
