"""
oscilloflow

Pseudospectral lab for the Navier-Stokes equations and the supercritical
SQG equation with a time-oscillating coefficient b(N t) in front of the
nonlinearity, on the periodic box [0, 2pi)^d.

The package integrates both systems, tracks the Sobolev functionals that
control their solutions, and checks the interpolation inequalities those
bounds rest on.
"""

__version__ = "0.1.0"

from .config import SimulationConfig, load_config
from .dynamics import Health, SimulationState, run_simulation
from .registry import REGISTRY, get_component, register
from .spectral import SpectralField, TorusGrid

__all__ = [
    "REGISTRY", "register", "get_component",
    "SimulationConfig", "load_config",
    "Health", "SimulationState", "run_simulation",
    "SpectralField", "TorusGrid",
]
