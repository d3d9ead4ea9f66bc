"""Compact scenes shared by the test modules"""

from ovs_birefringence.scene.models import (
    BoxPrimitive,
    CylinderPrimitive,
    GeometrySpec,
    PathSpec,
    Scene,
    SimParams,
)
from ovs_birefringence.scene.presets import BGO_OPTICS, DEFAULT_MATERIALS, builtin_mode

MM = 1e-3


def compact_geometry(path_y: float = 0.0) -> GeometrySpec:
    """20 x 20 x 4 mm heater plate, r = 8 mm support, 10 mm crystal cube on top"""
    return GeometrySpec(
        primitives=(
            BoxPrimitive(name="heater", material="al",
                         origin=(-10 * MM, -10 * MM, 0.0), extents=(20 * MM, 20 * MM, 4 * MM)),
            CylinderPrimitive(name="support", material="sio2",
                              base_center=(0.0, 0.0, 4 * MM), axis="z", radius=8 * MM, height=4 * MM),
            BoxPrimitive(name="crystal", material="bgo",
                         origin=(-5 * MM, -5 * MM, 8 * MM), extents=(10 * MM, 10 * MM, 10 * MM)),
        ),
        path=PathSpec(entry=(-5 * MM, path_y, 13 * MM), direction=(1.0, 0.0, 0.0), length=10 * MM),
    )


def compact_sim(**changes) -> SimParams:
    values = dict(t_total=10.0, t_step=5.0, mesh_resolution=1 * MM, linear_solver="direct")
    values.update(changes)
    return SimParams(**values)


def compact_scene(mode_name: str = "Cu 10:0", path_y: float = 0.0, **sim_changes) -> Scene:
    mode = builtin_mode(mode_name)
    return Scene(
        name=mode.slug,
        materials=dict(DEFAULT_MATERIALS),
        optics=BGO_OPTICS,
        geometry=compact_geometry(path_y),
        electrode=mode,
        sim=compact_sim(**sim_changes),
    )


def crystal_only_scene(mode_name: str = "Cu 10:0", **sim_changes) -> Scene:
    """The 10 mm crystal alone, floating (no heater)"""
    geometry = compact_geometry()
    return compact_scene(mode_name, **sim_changes).model_copy(update={
        "geometry": geometry.model_copy(update={"primitives": geometry.primitives[2:]}),
    })


COMPACT_DOCUMENT = """
[scene]
name = compact
crystal_material = bgo
heater_material = al

[optics]
base_index = 2.07
r41 = 1.03e-12
rel_permittivity = 16.0

[primitive.heater]
shape = box
material = al
origin = -0.01, -0.01, 0.0
extents = 0.02, 0.02, 0.004

[primitive.support]
shape = cylinder
material = sio2
base_center = 0.0, 0.0, 0.004
axis = z
radius = 0.008
height = 0.004

[primitive.crystal]
shape = box
material = bgo
origin = -0.005, -0.005, 0.008
extents = 0.01, 0.01, 0.01

[electrode]
preset = Cu 10:0

[sim]
t_total = 10
t_step = 5
linear_solver = direct
"""
