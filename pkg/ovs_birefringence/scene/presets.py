"""
Built-in materials, electrode modes and the default stacked sensor scene:
an aluminium heater plate, a fused-silica support cylinder and a 10 mm BGO
cube with the light path running through its centre along x.
"""

from typing import Dict

from .models import (
    BoxPrimitive,
    CylinderPrimitive,
    ElectrodeMode,
    GeometrySpec,
    MaterialProps,
    OpticalProps,
    PathSpec,
    Scene,
    SimParams,
    mode_slug,
)
from ..errors import ConfigError

BGO = MaterialProps(
    density=7130.0, specific_heat=3.5e2, poisson=0.20,
    youngs=7.31e10, thermal_expansion=6.3e-6, conductivity=0.18,
)
SIO2 = MaterialProps(
    density=2200.0, specific_heat=8.91e2, poisson=0.17,
    youngs=7.50e10, thermal_expansion=5.5e-7, conductivity=1.46,
)
CU = MaterialProps(
    density=8940.0, specific_heat=3.85e2, poisson=0.34,
    youngs=12.6e10, thermal_expansion=1.7e-5, conductivity=400.0,
)
AL = MaterialProps(
    density=2730.0, specific_heat=7.50e2, poisson=0.33,
    youngs=7.0e10, thermal_expansion=2.4e-5, conductivity=238.0,
)

# ITO electrodes are fused-silica slabs; the conductive film only sets the potential.
DEFAULT_MATERIALS: Dict[str, MaterialProps] = {
    "bgo": BGO,
    "sio2": SIO2,
    "cu": CU,
    "al": AL,
    "ito": SIO2,
}

# BGO near 976 nm; not part of the thermal data set above.
BGO_OPTICS = OpticalProps(base_index=2.07, r41=1.03e-12, rel_permittivity=16.0)

CU_FOIL_THICKNESS = 0.5e-3
ITO_SLAB_THICKNESS = 1.0e-3
REFERENCE_VOLTAGE = 1000.0

BUILTIN_MODES: Dict[str, ElectrodeMode] = {
    mode.name: mode
    for mode in (
        ElectrodeMode(name="Cu 10:0", material="cu", ratio_x=10, ratio_y=0,
                      thickness=CU_FOIL_THICKNESS, applied_voltage=REFERENCE_VOLTAGE),
        ElectrodeMode(name="Cu 5:2", material="cu", ratio_x=5, ratio_y=2,
                      thickness=CU_FOIL_THICKNESS, applied_voltage=REFERENCE_VOLTAGE),
        ElectrodeMode(name="Cu 5:4", material="cu", ratio_x=5, ratio_y=4,
                      thickness=CU_FOIL_THICKNESS, applied_voltage=REFERENCE_VOLTAGE),
        ElectrodeMode(name="ITO 0:5", material="ito", ratio_x=0, ratio_y=5,
                      thickness=ITO_SLAB_THICKNESS, applied_voltage=REFERENCE_VOLTAGE),
        ElectrodeMode(name="ITO 0:7", material="ito", ratio_x=0, ratio_y=7,
                      thickness=ITO_SLAB_THICKNESS, applied_voltage=REFERENCE_VOLTAGE),
        ElectrodeMode(name="ITO 0:10", material="ito", ratio_x=0, ratio_y=10,
                      thickness=ITO_SLAB_THICKNESS, applied_voltage=REFERENCE_VOLTAGE),
    )
}

BUILTIN_SLUGS: Dict[str, str] = {mode_slug(name): name for name in BUILTIN_MODES}

# Two-segment paths through the built-ins, start -> middle -> end.
FAMILY_ENDPOINTS = {
    "cu": ("Cu 10:0", "Cu 5:2", "Cu 5:4"),
    "ito": ("ITO 0:5", "ITO 0:7", "ITO 0:10"),
}


def builtin_mode(name: str) -> ElectrodeMode:
    """Look up a built-in mode by display name ('Cu 5:4') or slug ('cu_5_4')"""
    key = name.strip()
    if key in BUILTIN_MODES:
        return BUILTIN_MODES[key]
    slug = mode_slug(key)
    if slug in BUILTIN_SLUGS:
        return BUILTIN_MODES[BUILTIN_SLUGS[slug]]
    raise ConfigError(f"unknown built-in mode '{name}'", field="electrode.preset")


def default_geometry() -> GeometrySpec:
    return GeometrySpec(
        primitives=(
            BoxPrimitive(name="heater", material="al",
                         origin=(-0.025, -0.025, 0.0), extents=(0.05, 0.05, 0.01)),
            CylinderPrimitive(name="support", material="sio2",
                              base_center=(0.0, 0.0, 0.01), axis="z", radius=0.025, height=0.015),
            BoxPrimitive(name="crystal", material="bgo",
                         origin=(-0.005, -0.005, 0.025), extents=(0.01, 0.01, 0.01)),
        ),
        path=PathSpec(entry=(-0.005, 0.0, 0.03), direction=(1.0, 0.0, 0.0), length=0.01),
        optical_wavelength=976e-9,
    )


def default_scene(mode_name: str = "Cu 10:0") -> Scene:
    mode = builtin_mode(mode_name)
    return Scene(
        name=mode.slug,
        crystal_material="bgo",
        heater_material="al",
        materials=dict(DEFAULT_MATERIALS),
        optics=BGO_OPTICS,
        geometry=default_geometry(),
        electrode=mode,
        sim=SimParams(),
    )


def family_mode(family: str, s: float) -> ElectrodeMode:
    """
    Electrode mode at position s in [0, 1] along a family's built-in path

    s = 0, 0.5 and 1 land exactly on the three built-ins of the family; other
    values interpolate the run lengths linearly between neighbours.
    """
    family = family.lower()
    if family not in FAMILY_ENDPOINTS:
        raise ConfigError(f"unknown electrode family '{family}'", field="optimize")
    if not 0.0 <= s <= 1.0:
        raise ConfigError(f"family position {s} outside [0, 1]", field="optimize")
    start, middle, end = (BUILTIN_MODES[name] for name in FAMILY_ENDPOINTS[family])
    if s == 0.0:
        return start
    if s == 0.5:
        return middle
    if s == 1.0:
        return end
    low, high, local = (start, middle, s / 0.5) if s < 0.5 else (middle, end, (s - 0.5) / 0.5)
    ratio_x = round(low.ratio_x + local * (high.ratio_x - low.ratio_x), 6)
    ratio_y = round(low.ratio_y + local * (high.ratio_y - low.ratio_y), 6)
    label = "Cu" if family == "cu" else "ITO"
    return low.model_copy(update={
        "name": f"{label} {ratio_x:g}:{ratio_y:g}",
        "ratio_x": ratio_x,
        "ratio_y": ratio_y,
    })
