"""Simulation toolkit for the three-body ultrastrong-coupling trimer.

Exact diagonalization with Z2 x Z2 symmetry sectors, semiclassical and
Bogoliubov analysis, quantum-trajectory Lindblad dynamics, and a
circuit-QED drive-frequency planner.
"""

__version__ = "0.1.0"

from .model import LAMBDA_C, ModelParams, critical_coupling, derive_couplings

__all__ = ["LAMBDA_C", "ModelParams", "critical_coupling", "derive_couplings",
           "__version__"]
