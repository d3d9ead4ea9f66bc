"""
OVS Birefringence - thermal-stress birefringence simulation for optical voltage sensors
Heater-driven temperature, thermoelastic stress and electric field in an
electro-optic crystal, traced through a Jones-matrix sensor model.
"""

__version__ = "1.0.0"

from .pipeline import ModeResult, OVSPipeline, SweepReport, compare_modes, evaluate_mode, optimize_ratio
from .scene import Scene, builtin_mode, parse_config
from .validators import validate

__all__ = [
    "OVSPipeline",
    "ModeResult",
    "SweepReport",
    "evaluate_mode",
    "compare_modes",
    "optimize_ratio",
    "Scene",
    "builtin_mode",
    "parse_config",
    "validate",
]
