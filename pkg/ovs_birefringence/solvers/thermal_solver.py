"""
Transient heat conduction on the voxel mesh.

Backward Euler with a lumped capacity matrix. The heater base is a fixed
temperature for every t > 0; all other exterior faces lose heat by
convection to ambient. Snapshot 0 is the uniform ambient state before the
heater switches on.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from ..errors import ProbeError, ThermalError
from ..mesh.hex_element import LAPLACE, NODE_SIGNS
from ..mesh.voxel_mesh import VoxelMesh
from ..scene.models import MaterialProps, SimParams
from ..scene.presets import DEFAULT_MATERIALS
from ..utils.linalg import ReducedSystem, SPDSolver, assemble

logger = logging.getLogger("ThermalSolver")


@dataclass(frozen=True, eq=False)
class TemperatureHistory:
    """Nodal temperatures (K) at each snapshot time (s)"""

    mesh: VoxelMesh
    times: np.ndarray
    temperatures: np.ndarray

    def __len__(self) -> int:
        return int(self.times.size)

    def snapshot(self, index: int) -> np.ndarray:
        return self.temperatures[index]

    def element_temperatures(self, index: int) -> np.ndarray:
        return self.temperatures[index][self.mesh.connectivity].mean(axis=1)

    def region_mean(self, mask: np.ndarray) -> np.ndarray:
        """Mean element temperature over a region, one value per snapshot"""
        if not np.any(mask):
            raise ProbeError("region_mean over an empty region")
        per_element = self.temperatures[:, self.mesh.connectivity].mean(axis=2)
        return per_element[:, mask].mean(axis=1)

    def probe(self, point: Sequence[float], time: float) -> float:
        return probe(self, point, time)


def _trilinear(mesh: VoxelMesh, element: int, point: np.ndarray, nodal: np.ndarray) -> float:
    low = mesh.origin + mesh.element_ijk[element] * mesh.spacing
    xi = 2.0 * (point - low) / mesh.spacing - 1.0
    weights = 0.125 * np.prod(1.0 + NODE_SIGNS * xi, axis=1)
    return float(weights @ nodal[mesh.connectivity[element]])


def probe(history: TemperatureHistory, point: Sequence[float], time: float) -> float:
    """Temperature at a point and time: trilinear in space, linear in time"""
    point = np.asarray(point, dtype=float)
    element = history.mesh.locate(point)
    if element < 0:
        raise ProbeError(f"point {point.tolist()} is outside the mesh")
    times = history.times
    if time < times[0] or time > times[-1]:
        raise ProbeError(f"time {time} s outside [{times[0]}, {times[-1]}] s")

    upper = int(np.searchsorted(times, time, side="left"))
    if np.isclose(times[upper], time, rtol=0.0, atol=1e-12):
        return _trilinear(history.mesh, element, point, history.temperatures[upper])
    lower = upper - 1
    weight = (time - times[lower]) / (times[upper] - times[lower])
    before = _trilinear(history.mesh, element, point, history.temperatures[lower])
    after = _trilinear(history.mesh, element, point, history.temperatures[upper])
    return (1.0 - weight) * before + weight * after


class ThermalSolver:
    """Backward-Euler conduction with fixed-temperature base and convective skin"""

    def __init__(self, mesh: VoxelMesh, materials: Mapping[str, MaterialProps], params: SimParams):
        if not mesh.classified:
            raise ThermalError("mesh boundaries are not classified")
        self.mesh = mesh
        self.params = params
        h = mesh.spacing
        n = mesh.n_nodes

        conductivity = mesh.per_element({tag: m.conductivity for tag, m in materials.items()})
        self.conduction = assemble(mesh.connectivity, [(LAPLACE, conductivity * h)], n)

        heat_capacity = mesh.per_element({tag: m.volumetric_heat_capacity for tag, m in materials.items()})
        self.capacity = np.zeros(n)
        np.add.at(self.capacity, mesh.connectivity, np.repeat(heat_capacity[:, None] * h ** 3 / 8.0, 8, axis=1))

        self.film = np.zeros(n)
        if len(mesh.convective):
            face_nodes = mesh.convective.node_ids(mesh)
            np.add.at(self.film, face_nodes, params.convection_h * h ** 2 / 4.0)

        self.base_nodes = np.unique(mesh.heater_base.node_ids(mesh)) if len(mesh.heater_base) else np.zeros(0, dtype=np.int64)
        if self.base_nodes.size == 0:
            logger.warning("Heater base is empty; the scene will only exchange heat by convection")

    def _schedule(self) -> Tuple[int, float]:
        steps = self.params.t_total / self.params.t_step
        count = int(round(steps))
        if abs(steps - count) > 1e-9 * max(1.0, steps):
            raise ThermalError(
                f"t_total {self.params.t_total} s is not a whole number of {self.params.t_step} s steps"
            )
        return count, self.params.t_step

    def system_matrix(self, dt: float):
        return (self.conduction + sparse.diags(self.capacity / dt + self.film, format="csr")).tocsr()

    def run(self) -> TemperatureHistory:
        count, dt = self._schedule()
        params = self.params
        ambient, heater = params.ambient_t, params.heater_t
        matrix = self.system_matrix(dt)
        reduced = ReducedSystem.split(matrix, self.base_nodes)
        solver = SPDSolver(
            reduced.free_free, method=params.linear_solver, rel_tol=params.solver_rel_tol,
            max_iter=params.solver_max_iter, label="thermal step",
        )

        current = np.full(self.mesh.n_nodes, ambient)
        snapshots = [current.copy()]
        logger.info(f"Transient run: {count} steps of {dt} s over {self.mesh.n_nodes} nodes")
        for step in range(1, count + 1):
            # Solve for the increment; residual of the old state drives it.
            jump = heater - current[reduced.fixed]
            residual = self.film * ambient - (self.conduction @ current + self.film * current)
            rhs = residual[reduced.free] - reduced.free_fixed @ jump
            increment = solver.solve(rhs)
            current = current + reduced.expand(increment, jump)
            snapshots.append(current.copy())
            logger.debug(f"Step {step}: T in [{current.min():.3f}, {current.max():.3f}] K")

        times = np.arange(count + 1) * dt
        return TemperatureHistory(self.mesh, times, np.asarray(snapshots))

    def heat_balance(self, history: TemperatureHistory, step: int) -> Dict[str, float]:
        """
        Energy audit of one backward-Euler step (step >= 1)

        Returns:
            stored: change of sum(C * T) in J
            inflow: heat delivered through the heater base minus convective loss, in J
        """
        if not 1 <= step < len(history):
            raise ThermalError(f"step {step} outside 1..{len(history) - 1}")
        dt = float(history.times[step] - history.times[step - 1])
        before, after = history.snapshot(step - 1), history.snapshot(step)
        change = self.capacity * (after - before)
        loss = self.film * (after - self.params.ambient_t) * dt
        reaction = change + (self.conduction @ after) * dt + loss
        heater_in = float(np.sum(reaction[self.base_nodes]))
        return {
            "stored": float(np.sum(change)),
            "inflow": heater_in - float(np.sum(loss)),
            "heater_in": heater_in,
            "convective_out": float(np.sum(loss)),
        }


def run_transient(
    mesh: VoxelMesh,
    params: SimParams,
    materials: Optional[Mapping[str, MaterialProps]] = None,
) -> TemperatureHistory:
    if materials is None:
        materials = DEFAULT_MATERIALS
    return ThermalSolver(mesh, materials, params).run()
