from .models import ElectrodeMode, GeometrySpec, MaterialProps, OpticalProps, Scene, SignalParams, SimParams
from .parser import config_hash, parse_config, serialize_scene
from .presets import BUILTIN_MODES, builtin_mode, default_scene, family_mode

__all__ = [
    "Scene", "MaterialProps", "OpticalProps", "GeometrySpec", "ElectrodeMode", "SimParams", "SignalParams",
    "parse_config", "serialize_scene", "config_hash",
    "BUILTIN_MODES", "builtin_mode", "default_scene", "family_mode",
]
