"""
Quasi-static linear thermoelasticity, one solve per temperature snapshot.

Stress law per element (Voigt order 11, 22, 33, 12, 23, 13):

    sigma = lambda * tr(eps) * I + 2 * mu * eps - (3 * lambda + 2 * mu) * alpha * dT * I

Strain is taken at the element centroid from the trilinear shape functions.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from ..errors import ProbeError, SingularSystemError
from ..mesh.hex_element import CENTROID_STRAIN, STIFFNESS_LAMBDA, STIFFNESS_MU, THERMAL_LOAD
from ..mesh.voxel_mesh import PathSamples, VoxelMesh
from ..scene.models import MaterialProps, SimParams
from ..utils.linalg import ReducedSystem, SPDSolver, assemble, assemble_vector, element_dofs

logger = logging.getLogger("MechanicsSolver")

CONSTRAINTS = ("heater_base", "minimal", "clamped")
VOIGT_LABELS = ("s11", "s22", "s33", "s12", "s23", "s13")


@dataclass(frozen=True, eq=False)
class DisplacementField:
    """Nodal displacement (n_nodes, 3) in m"""

    mesh: VoxelMesh
    values: np.ndarray

    @property
    def max_magnitude(self) -> float:
        return float(np.max(np.linalg.norm(self.values, axis=1))) if self.values.size else 0.0


@dataclass(frozen=True, eq=False)
class StressField:
    """Element-centroid stress (Pa) and tensor strain, both (n_elements, 6)"""

    stress: np.ndarray
    strain: np.ndarray

    @property
    def von_mises(self) -> np.ndarray:
        return von_mises(self.stress)


class MechanicsSolver:
    """Tools for displacement and stress recovery on a fixed mesh"""

    def __init__(
        self,
        mesh: VoxelMesh,
        materials: Mapping[str, MaterialProps],
        params: SimParams,
        constraint: str = "heater_base",
    ):
        if constraint not in CONSTRAINTS:
            raise ValueError(f"constraint must be one of {', '.join(CONSTRAINTS)}")
        self.mesh = mesh
        self.params = params
        self.constraint = constraint
        h = mesh.spacing

        self.lam = mesh.per_element({tag: m.lame[0] for tag, m in materials.items()})
        self.mu = mesh.per_element({tag: m.lame[1] for tag, m in materials.items()})
        self.alpha = mesh.per_element({tag: m.thermal_expansion for tag, m in materials.items()})
        self.dofs = element_dofs(mesh.connectivity, 3)
        self.size = 3 * mesh.n_nodes

        stiffness = assemble(self.dofs, [(STIFFNESS_LAMBDA, self.lam * h), (STIFFNESS_MU, self.mu * h)], self.size)
        self.fixed = self._fixed_dofs()
        self.reduced = ReducedSystem.split(stiffness, self.fixed)
        self.solver = SPDSolver(
            self.reduced.free_free, method=params.linear_solver, rel_tol=params.solver_rel_tol,
            max_iter=params.solver_max_iter, label="thermoelastic solve",
        )
        self._previous: Optional[np.ndarray] = None
        logger.info(f"Stiffness assembled: {self.size} dofs, {self.fixed.size} fixed ({constraint})")

    def _fixed_dofs(self) -> np.ndarray:
        mesh = self.mesh
        coords = mesh.node_coords
        if self.constraint == "clamped":
            exterior = mesh.exterior_faces()
            nodes = np.unique(exterior.node_ids(mesh))
            return element_dofs(nodes[:, None], 3).ravel()

        if self.constraint == "heater_base":
            if mesh.heater_base is None or not len(mesh.heater_base):
                raise SingularSystemError("unconstrained system: heater base is empty")
            base = np.unique(mesh.heater_base.node_ids(mesh))
            corner = base[np.lexsort((coords[base, 2], coords[base, 1], coords[base, 0]))[0]]
            row = base[np.isclose(coords[base, 1], coords[corner, 1])]
            edge = row[np.argmax(coords[row, 0])]
            if edge == corner:
                raise SingularSystemError("unconstrained system: heater base is a single node wide")
            fixed = [3 * base + 2, [3 * corner, 3 * corner + 1], [3 * edge + 1]]
            return np.unique(np.concatenate([np.atleast_1d(np.asarray(f)) for f in fixed]))

        everything = np.arange(mesh.n_nodes)
        corner = everything[np.lexsort((coords[:, 2], coords[:, 1], coords[:, 0]))[0]]
        same_yz = everything[np.isclose(coords[:, 1], coords[corner, 1]) & np.isclose(coords[:, 2], coords[corner, 2])]
        same_xz = everything[np.isclose(coords[:, 0], coords[corner, 0]) & np.isclose(coords[:, 2], coords[corner, 2])]
        along_x = same_yz[np.argmax(coords[same_yz, 0])]
        along_y = same_xz[np.argmax(coords[same_xz, 1])]
        if along_x == corner or along_y == corner:
            raise SingularSystemError("unconstrained system: body too thin for a 3-2-1 support")
        return np.array(sorted({3 * corner, 3 * corner + 1, 3 * corner + 2,
                                3 * along_x + 1, 3 * along_x + 2, 3 * along_y + 2}))

    def thermal_load(self, temperatures: np.ndarray, reference_t: float) -> np.ndarray:
        h = self.mesh.spacing
        delta = temperatures[self.mesh.connectivity] - reference_t
        modulus = (3.0 * self.lam + 2.0 * self.mu) * self.alpha * h ** 2
        local = modulus[:, None] * (delta @ THERMAL_LOAD.T)
        return assemble_vector(self.dofs, local, self.size)

    def solve(self, temperatures: np.ndarray, reference_t: float) -> DisplacementField:
        if temperatures.shape != (self.mesh.n_nodes,):
            raise ValueError(f"temperature field has shape {temperatures.shape}, mesh has {self.mesh.n_nodes} nodes")
        load = self.thermal_load(temperatures, reference_t)
        free = self.solver.solve(load[self.reduced.free], x0=self._previous)
        self._previous = free
        values = self.reduced.expand(free, np.zeros(self.reduced.fixed.size)).reshape(-1, 3)
        return DisplacementField(self.mesh, values)

    def recover(self, displacement: DisplacementField, temperatures: np.ndarray, reference_t: float) -> StressField:
        return recover_stress(self.mesh, displacement, temperatures, reference_t,
                              lam=self.lam, mu=self.mu, alpha=self.alpha)


def solve_thermoelastic(
    mesh: VoxelMesh,
    temperatures: np.ndarray,
    reference_t: float,
    materials: Mapping[str, MaterialProps],
    params: Optional[SimParams] = None,
    constraint: str = "heater_base",
) -> DisplacementField:
    return MechanicsSolver(mesh, materials, params or SimParams(), constraint).solve(temperatures, reference_t)


def recover_stress(
    mesh: VoxelMesh,
    displacement: DisplacementField,
    temperatures: np.ndarray,
    reference_t: float,
    materials: Optional[Mapping[str, MaterialProps]] = None,
    lam: Optional[np.ndarray] = None,
    mu: Optional[np.ndarray] = None,
    alpha: Optional[np.ndarray] = None,
) -> StressField:
    """
    Centroid strain and stress per element

    Args:
        materials: material table; may be omitted when lam, mu and alpha
            (per-element arrays) are passed directly

    Returns:
        StressField with tensor strain (eps12 = gamma12 / 2)
    """
    if displacement.values.shape != (mesh.n_nodes, 3) or temperatures.shape != (mesh.n_nodes,):
        raise ValueError("displacement or temperature size does not match the mesh")
    if lam is None:
        lam = mesh.per_element({tag: m.lame[0] for tag, m in materials.items()})
        mu = mesh.per_element({tag: m.lame[1] for tag, m in materials.items()})
        alpha = mesh.per_element({tag: m.thermal_expansion for tag, m in materials.items()})

    nodal = displacement.values[mesh.connectivity].reshape(mesh.n_elements, 24)
    engineering = nodal @ CENTROID_STRAIN.T / mesh.spacing
    delta = temperatures[mesh.connectivity].mean(axis=1) - reference_t

    trace = engineering[:, :3].sum(axis=1)
    stress = np.empty_like(engineering)
    thermal = (3.0 * lam + 2.0 * mu) * alpha * delta
    stress[:, :3] = (lam * trace - thermal)[:, None] + 2.0 * mu[:, None] * engineering[:, :3]
    stress[:, 3:] = mu[:, None] * engineering[:, 3:]

    strain = engineering.copy()
    strain[:, 3:] *= 0.5
    return StressField(stress=stress, strain=strain)


def von_mises(stress: np.ndarray) -> np.ndarray:
    """Von Mises equivalent stress of Voigt 6-vectors (last axis)"""
    s = np.asarray(stress, dtype=float)
    s11, s22, s33, s12, s23, s13 = (s[..., i] for i in range(6))
    normal = 0.5 * ((s11 - s22) ** 2 + (s22 - s33) ** 2 + (s33 - s11) ** 2)
    return np.sqrt(normal + 3.0 * (s12 ** 2 + s23 ** 2 + s13 ** 2))


def von_mises_summary(field: StressField, mesh: VoxelMesh) -> Dict[str, Dict[str, float]]:
    """Max and mean Von Mises stress per material"""
    values = field.von_mises
    summary = {}
    for index, tag in enumerate(mesh.material_names):
        mask = mesh.element_material == index
        if np.any(mask):
            summary[tag] = {"max": float(values[mask].max()), "mean": float(values[mask].mean())}
    return summary


def stress_along_path(field: StressField, samples: PathSamples) -> List[Tuple[int, np.ndarray]]:
    """(section index, averaged stress 6-vector) for each path section, entry to exit"""
    count = field.stress.shape[0]
    result = []
    for index, ids in enumerate(samples.element_ids):
        if max(ids) >= count:
            raise ProbeError(f"path section {index} references element outside the stress field")
        result.append((index, field.stress[list(ids)].mean(axis=0)))
    return result
