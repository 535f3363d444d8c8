"""
SpinBrayton Services Module

This module provides easy access to the solver classes and their ready-made
instances used by the CLI and the HTTP API.
"""

# Import service instances for easy access
from .processes import path_integrator, process_builder
from .cycles import brayton_solver
from .isothermal import isothermal_analyzer
from .sweeps import sweep_runner

# Import service classes for type hints and direct instantiation
from .processes import PathIntegrator, ProcessBuilder
from .cycles import BraytonCycleSolver
from .isothermal import IsothermalAnalyzer
from .sweeps import SweepRunner
from .verification import InvariantSuite, run_suite

__all__ = [
    # Service instances (ready to use)
    "process_builder",
    "path_integrator",
    "brayton_solver",
    "isothermal_analyzer",
    "sweep_runner",

    # Service classes (for type hints and instantiation)
    "ProcessBuilder",
    "PathIntegrator",
    "BraytonCycleSolver",
    "IsothermalAnalyzer",
    "SweepRunner",
    "InvariantSuite",
    "run_suite",
]
