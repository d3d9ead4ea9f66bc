"""
Electrode-driven potential inside the crystal.

Only crystal elements carry the Laplace problem; faces without an electrode
are insulating. Terminal 0 sits at +V/2 and terminal 1 at -V/2.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..errors import ElectrodeError, HalfWaveVoltageError
from ..mesh.hex_element import CENTROID_GRADIENTS, LAPLACE
from ..mesh.voxel_mesh import PathSamples, VoxelMesh
from ..optics.birefringence import SectionBirefringence, principal_birefringence
from ..optics.transforms import electrooptic_delta_b
from ..scene.models import ElectrodeMode, OpticalProps, SimParams
from ..utils.linalg import ReducedSystem, SPDSolver, assemble

logger = logging.getLogger("ElectrostaticSolver")

VACUUM_PERMITTIVITY = 8.8541878128e-12
# Retardation below this fraction of 2*pi*n0^3*r41*V/lambda counts as no modulation.
RETARDATION_FLOOR = 1e-6

__all__ = [
    "ElectrostaticSolver",
    "FieldSummary",
    "PotentialField",
    "electrooptic_delta_b",
    "electrooptic_sections",
    "field_summary",
    "half_wave_voltage",
    "mean_field_angle",
    "solve_potential",
]


@dataclass(frozen=True, eq=False)
class PotentialField:
    """Nodal potential (V) and element field (V/m); NaN outside the crystal"""

    mesh: VoxelMesh
    potential: np.ndarray
    field: np.ndarray
    applied_voltage: float

    @property
    def crystal_elements(self) -> np.ndarray:
        return np.nonzero(np.isfinite(self.field[:, 0]))[0]


@dataclass(frozen=True)
class FieldSummary:
    mean_angle: float
    mean_field: np.ndarray
    section_fields: np.ndarray
    lengths: np.ndarray

    @property
    def mean_magnitude(self) -> float:
        return float(np.linalg.norm(self.mean_field))


class ElectrostaticSolver:
    """Laplace solve over the crystal with equipotential electrode contacts"""

    def __init__(self, mesh: VoxelMesh, optics: OpticalProps, params: Optional[SimParams] = None):
        if not mesh.classified:
            raise ElectrodeError("mesh boundaries are not classified")
        self.mesh = mesh
        self.params = params or SimParams()
        crystal = np.nonzero(mesh.crystal_mask())[0]
        if crystal.size == 0:
            raise ElectrodeError("no crystal elements to carry the field")
        self.crystal = crystal
        self.nodes = np.unique(mesh.connectivity[crystal])
        local = np.full(mesh.n_nodes, -1, dtype=np.int64)
        local[self.nodes] = np.arange(self.nodes.size)
        self.local = local

        permittivity = VACUUM_PERMITTIVITY * optics.rel_permittivity * mesh.spacing
        self.matrix = assemble(
            local[mesh.connectivity[crystal]],
            [(LAPLACE, np.full(crystal.size, permittivity))],
            self.nodes.size,
        )
        self.terminals = self._terminals()
        fixed = np.concatenate([local[t] for t in self.terminals])
        self.reduced = ReducedSystem.split(self.matrix, fixed)
        self.solver = SPDSolver(
            self.reduced.free_free, method=self.params.linear_solver, rel_tol=self.params.solver_rel_tol,
            max_iter=self.params.solver_max_iter, label="electrostatic solve",
        )

    def _terminals(self) -> List[np.ndarray]:
        contacts = self.mesh.electrode_contacts
        if len(contacts) < 2 or any(c.size == 0 for c in contacts[:2]):
            raise ElectrodeError("electrodes missing: both terminals need contact with the crystal")
        positive, negative = contacts[0], contacts[1]
        shared = np.intersect1d(positive, negative)
        if shared.size:
            raise ElectrodeError(f"electrodes short-circuited: {shared.size} shared node(s)")
        return [positive, negative]

    def solve(self, voltage: float, polarity: int = 1) -> PotentialField:
        positive, negative = self.terminals
        values = polarity * np.concatenate([
            np.full(positive.size, 0.5 * voltage),
            np.full(negative.size, -0.5 * voltage),
        ])
        order = np.argsort(np.concatenate([self.local[positive], self.local[negative]]))
        fixed_values = values[order]
        rhs = -(self.reduced.free_fixed @ fixed_values)
        free_values = self.solver.solve(rhs)
        local_potential = self.reduced.expand(free_values, fixed_values)

        mesh = self.mesh
        potential = np.full(mesh.n_nodes, np.nan)
        potential[self.nodes] = local_potential
        field = np.full((mesh.n_elements, 3), np.nan)
        nodal = potential[mesh.connectivity[self.crystal]]
        field[self.crystal] = -(nodal @ CENTROID_GRADIENTS.T) / mesh.spacing
        logger.debug(f"Potential solved at {voltage} V over {self.nodes.size} crystal nodes")
        return PotentialField(mesh, potential, field, float(voltage))


def solve_potential(mesh: VoxelMesh, mode: ElectrodeMode, optics: OpticalProps,
                    params: Optional[SimParams] = None) -> PotentialField:
    return ElectrostaticSolver(mesh, optics, params).solve(mode.applied_voltage)


def field_summary(field: PotentialField, samples: PathSamples) -> FieldSummary:
    sections = samples.average(field.field)
    if not np.all(np.isfinite(sections)):
        raise ElectrodeError("path section outside the solved crystal field")
    weights = samples.lengths / samples.total_length
    mean = weights @ sections
    magnitude = float(np.linalg.norm(mean))
    if magnitude == 0.0:
        raise ElectrodeError("zero average field along the optical path")
    cosine = min(1.0, abs(float(mean @ samples.direction)) / magnitude)
    angle = math.degrees(math.acos(cosine))
    return FieldSummary(mean_angle=angle, mean_field=mean, section_fields=sections, lengths=samples.lengths)


def mean_field_angle(field: PotentialField, samples: PathSamples) -> float:
    """Angle in degrees between the length-weighted mean field and the light direction"""
    return field_summary(field, samples).mean_angle


def electrooptic_sections(
    field: PotentialField,
    samples: PathSamples,
    optics: OpticalProps,
    wavelength: float,
    axis: str = "x",
) -> List[SectionBirefringence]:
    section_fields = samples.average(field.field)
    return [
        principal_birefringence(electrooptic_delta_b(e, optics), axis=axis, n0=optics.base_index,
                                length=float(length), wavelength=wavelength)
        for e, length in zip(section_fields, samples.lengths)
    ]


def half_wave_voltage(
    mesh: VoxelMesh,
    mode: ElectrodeMode,
    optics: OpticalProps,
    samples: PathSamples,
    wavelength: float = 976e-9,
    axis: str = "x",
    field: Optional[PotentialField] = None,
    params: Optional[SimParams] = None,
) -> float:
    """
    Voltage that accumulates a pi retardation, scaled linearly from the mode's
    applied voltage.
    """
    if field is None:
        field = solve_potential(mesh, mode, optics, params)
    sections = electrooptic_sections(field, samples, optics, wavelength, axis)
    retardation = sum(section.delta_m for section in sections)
    voltage = abs(field.applied_voltage)
    scale = 2.0 * math.pi * optics.base_index ** 3 * abs(optics.r41) * voltage / wavelength
    if retardation <= RETARDATION_FLOOR * scale:
        raise HalfWaveVoltageError(
            f"{mode.name}: electro-optic retardation {retardation:.3e} rad is below the numeric floor; "
            "effectively infinite HWV"
        )
    return voltage * math.pi / retardation
