"""Spectral solver and bound checks for two-phase Stokes flow with a flat interface."""

from .config import ConfigError, RunConfig, load_config
from .grid import GridSpec
from .resolvent import ForceData, InterfaceData, TwoPhaseField, solve_rswith, solve_rswithout
from .symbols import FluidParams, SpectralPoint, build_symbol_table

__all__ = [
    "ConfigError", "RunConfig", "load_config", "GridSpec", "ForceData", "InterfaceData", "TwoPhaseField",
    "solve_rswith", "solve_rswithout", "FluidParams", "SpectralPoint", "build_symbol_table",
]

__version__ = "0.1.0"
