"""
Scene models

Immutable pydantic records describing one simulation: per-material constants,
optical constants, solid primitives, the optical path, the electrode mode and
the run settings. Every quantity is SI except the electrode run lengths, which
are given in millimetres the way the modes are named.
"""

import math
from typing import Annotated, Any, Dict, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, field_validator, model_validator

AXES = ("x", "y", "z")


def _parse_vector(value: Any) -> Any:
    if isinstance(value, str):
        parts = [part.strip() for part in value.split(",")]
        if len(parts) != 3 or not all(parts):
            raise ValueError("expected three comma-separated numbers")
        return tuple(float(part) for part in parts)
    return value


Vector3 = Annotated[Tuple[float, float, float], BeforeValidator(_parse_vector)]


class FrozenModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)


class MaterialProps(FrozenModel):
    """Thermal and mechanical constants of one material"""

    density: float = Field(gt=0, description="kg/m^3")
    specific_heat: float = Field(gt=0, description="J/(kg K)")
    poisson: float
    youngs: float = Field(gt=0, description="Pa")
    thermal_expansion: float = Field(gt=0, description="1/K")
    conductivity: float = Field(gt=0, description="W/(m K)")

    @field_validator("poisson")
    @classmethod
    def _poisson_in_range(cls, value: float) -> float:
        if not 0.0 < value < 0.5:
            raise ValueError("poisson out of range")
        return value

    @property
    def lame(self) -> Tuple[float, float]:
        """Lamé constants (lambda, mu)"""
        nu = self.poisson
        lam = self.youngs * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
        mu = self.youngs / (2.0 * (1.0 + nu))
        return lam, mu

    @property
    def volumetric_heat_capacity(self) -> float:
        return self.density * self.specific_heat


class OpticalProps(FrozenModel):
    """Optical constants of the active crystal"""

    base_index: float = Field(gt=1)
    q11: float = -2.995e-13
    q12: float = 0.0
    q44: float = -1.365e-12
    r41: float
    rel_permittivity: float = Field(gt=0)

    @model_validator(mode="after")
    def _photoelastic_nonzero(self) -> "OpticalProps":
        if self.q11 - self.q12 == 0.0 or self.q44 == 0.0:
            raise ValueError("q11 - q12 and q44 must be nonzero")
        if self.r41 == 0.0:
            raise ValueError("r41 must be nonzero")
        return self


class BoxPrimitive(FrozenModel):
    shape: Literal["box"] = "box"
    name: str
    material: str
    origin: Vector3
    extents: Vector3

    @field_validator("extents")
    @classmethod
    def _positive_extents(cls, value: Tuple[float, float, float]) -> Tuple[float, float, float]:
        if min(value) <= 0.0:
            raise ValueError("extents must be positive")
        return value

    @property
    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        low = np.asarray(self.origin, dtype=float)
        return low, low + np.asarray(self.extents, dtype=float)

    @property
    def volume(self) -> float:
        return float(np.prod(self.extents))

    def contains(self, points: np.ndarray) -> np.ndarray:
        low, high = self.bounds
        return np.all((points >= low) & (points < high), axis=-1)


class CylinderPrimitive(FrozenModel):
    shape: Literal["cylinder"] = "cylinder"
    name: str
    material: str
    base_center: Vector3
    axis: Literal["x", "y", "z"] = "z"
    radius: float = Field(gt=0)
    height: float = Field(gt=0)

    @property
    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        axis = AXES.index(self.axis)
        low = np.asarray(self.base_center, dtype=float) - self.radius
        high = np.asarray(self.base_center, dtype=float) + self.radius
        low[axis] = self.base_center[axis]
        high[axis] = self.base_center[axis] + self.height
        return low, high

    @property
    def volume(self) -> float:
        return math.pi * self.radius ** 2 * self.height

    def contains(self, points: np.ndarray) -> np.ndarray:
        axis = AXES.index(self.axis)
        offset = points - np.asarray(self.base_center, dtype=float)
        along = offset[..., axis]
        radial = np.delete(offset, axis, axis=-1)
        inside_disc = np.sum(radial ** 2, axis=-1) <= self.radius ** 2
        return inside_disc & (along >= 0.0) & (along < self.height)


Primitive = Annotated[Union[BoxPrimitive, CylinderPrimitive], Field(discriminator="shape")]


class PathSpec(FrozenModel):
    """Straight optical path through the crystal"""

    entry: Vector3
    direction: Vector3
    length: float = Field(gt=0)

    @field_validator("direction")
    @classmethod
    def _nonzero_direction(cls, value: Tuple[float, float, float]) -> Tuple[float, float, float]:
        if not any(value):
            raise ValueError("direction must be nonzero")
        return value

    @property
    def unit_direction(self) -> np.ndarray:
        direction = np.asarray(self.direction, dtype=float)
        return direction / np.linalg.norm(direction)

    @property
    def exit(self) -> np.ndarray:
        return np.asarray(self.entry, dtype=float) + self.length * self.unit_direction

    @property
    def axis(self) -> Optional[str]:
        """Name of the coordinate axis the path follows, if it follows one"""
        direction = self.unit_direction
        index = int(np.argmax(np.abs(direction)))
        if abs(abs(direction[index]) - 1.0) < 1e-12:
            return AXES[index]
        return None


class GeometrySpec(FrozenModel):
    primitives: Tuple[Primitive, ...]
    path: PathSpec
    optical_wavelength: float = Field(default=976e-9, gt=0)

    @model_validator(mode="after")
    def _unique_names(self) -> "GeometrySpec":
        names = [primitive.name for primitive in self.primitives]
        if len(set(names)) != len(names):
            raise ValueError("primitive names must be unique")
        return self


class ElectrodeMode(FrozenModel):
    """Electrode pair wrapped around the crystal's +x+y and -x-y corners"""

    name: str
    material: Literal["cu", "ito"]
    ratio_x: float = Field(ge=0, description="mm of electrode run along x")
    ratio_y: float = Field(ge=0, description="mm of electrode run along y")
    thickness: float = Field(gt=0)
    applied_voltage: float = 1000.0

    @model_validator(mode="after")
    def _some_run(self) -> "ElectrodeMode":
        if self.ratio_x == 0.0 and self.ratio_y == 0.0:
            raise ValueError("ratio_x and ratio_y are both zero")
        if self.applied_voltage == 0.0:
            raise ValueError("applied_voltage must be nonzero")
        return self

    @property
    def transparent(self) -> bool:
        return self.material == "ito"

    @property
    def slug(self) -> str:
        return mode_slug(self.name)


def mode_slug(name: str) -> str:
    """'Cu 5:4' -> 'cu_5_4'"""
    slug = name.strip().lower()
    for token in (" ", ":", ".", "-"):
        slug = slug.replace(token, "_")
    return "_".join(part for part in slug.split("_") if part)


class SimParams(FrozenModel):
    t_total: float = Field(default=60.0, gt=0)
    t_step: float = Field(default=5.0, gt=0)
    ambient_t: float = Field(default=300.0, gt=0)
    heater_t: float = Field(default=358.0, gt=0)
    convection_h: float = Field(default=10.0, ge=0)
    reference_t: float = Field(default=300.0, gt=0)
    mesh_resolution: float = Field(default=1e-3, gt=0)
    solver_rel_tol: float = Field(default=1e-9, gt=0, lt=1)
    solver_max_iter: int = Field(default=20000, gt=0)
    linear_solver: Literal["cg", "direct"] = "direct"
    max_elements: int = Field(default=2_000_000, gt=0)

    @model_validator(mode="before")
    @classmethod
    def _reference_defaults_to_ambient(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("reference_t") in (None, ""):
            data = dict(data)
            data["reference_t"] = data.get("ambient_t", 300.0)
        return data

    @model_validator(mode="after")
    def _step_fits(self) -> "SimParams":
        if self.t_step > self.t_total:
            raise ValueError("t_step exceeds t_total")
        return self

    @property
    def snapshot_count(self) -> int:
        return int(round(self.t_total / self.t_step)) + 1


class SignalParams(FrozenModel):
    drive_frequency: float = Field(default=50.0, gt=0)
    window: float = Field(default=0.16, gt=0)
    sample_rate: float = Field(default=100_000.0, gt=0)
    tau_ref: Optional[float] = Field(default=None, gt=0)


class Scene(FrozenModel):
    name: str = "scene"
    crystal_material: str = "bgo"
    heater_material: str = "al"
    materials: Dict[str, MaterialProps]
    optics: OpticalProps
    geometry: GeometrySpec
    electrode: ElectrodeMode
    sim: SimParams = SimParams()
    signal: SignalParams = SignalParams()

    @model_validator(mode="after")
    def _materials_known(self) -> "Scene":
        for primitive in self.geometry.primitives:
            if primitive.material not in self.materials:
                raise ValueError(f"primitive '{primitive.name}' uses unknown material '{primitive.material}'")
        for tag in (self.crystal_material, self.electrode.material):
            if tag not in self.materials:
                raise ValueError(f"material '{tag}' is not defined")
        return self

    @property
    def crystal(self) -> BoxPrimitive:
        """The crystal primitive (the last-listed box with the crystal material)"""
        candidates = [
            p for p in self.geometry.primitives
            if p.material == self.crystal_material and isinstance(p, BoxPrimitive)
        ]
        if not candidates:
            raise ValueError(f"no box primitive uses crystal material '{self.crystal_material}'")
        return candidates[-1]

    @property
    def tau_ref(self) -> float:
        return self.signal.tau_ref if self.signal.tau_ref is not None else self.sim.t_total

    def with_mode(self, mode: ElectrodeMode) -> "Scene":
        return self.model_copy(update={"electrode": mode})

    def with_sim(self, **changes: Any) -> "Scene":
        values = self.sim.model_dump()
        if "reference_t" not in changes and values["reference_t"] == values["ambient_t"]:
            del values["reference_t"]
        sim = SimParams.model_validate({**values, **changes})
        return self.model_copy(update={"sim": sim})
