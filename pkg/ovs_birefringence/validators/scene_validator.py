import logging
from typing import Any, Dict, List

import numpy as np
from pydantic import ValidationError

from ..scene.electrodes import contact_patches
from ..scene.models import BoxPrimitive, ElectrodeMode, GeometrySpec, OpticalProps, Scene, SignalParams, SimParams

logger = logging.getLogger("SceneValidator")

_PATH_SAMPLES = 21
_TOL = 1e-9


class SceneValidator:
    """Validate a scene before any mesh is built"""

    def __init__(self, edge_tolerance: float = 1e-6):
        self.edge_tolerance = edge_tolerance

    def validate_scene(self, scene: Scene) -> Dict[str, Any]:
        """
        Collect every problem with a scene

        Args:
            scene: Scene to check; may have been built without validation

        Returns:
            {"is_valid": bool, "diagnostics": [str, ...]}
        """
        diagnostics: List[str] = []
        diagnostics += self._check_sim(scene.sim)
        diagnostics += self._check_models(scene)
        if not diagnostics:
            diagnostics += self._check_resolution(scene)
            diagnostics += self._check_path(scene)
            diagnostics += self._check_electrodes(scene)
            diagnostics += self._check_heater(scene)
        for message in diagnostics:
            logger.debug(f"{scene.name}: {message}")
        return {"is_valid": not diagnostics, "diagnostics": diagnostics}

    def _check_sim(self, sim: SimParams) -> List[str]:
        problems = []
        if sim.t_step <= 0:
            problems.append("nonpositive time step")
        elif sim.t_step > sim.t_total:
            problems.append("t_step exceeds t_total")
        for name in ("ambient_t", "heater_t", "reference_t"):
            if getattr(sim, name) <= 0:
                problems.append(f"{name} must be above 0 K")
        if sim.mesh_resolution <= 0:
            problems.append("nonpositive mesh resolution")
        return problems

    def _check_models(self, scene: Scene) -> List[str]:
        problems = []
        parts = (
            ("optics", OpticalProps, scene.optics),
            ("geometry", GeometrySpec, scene.geometry),
            ("electrode", ElectrodeMode, scene.electrode),
            ("signal", SignalParams, scene.signal),
        )
        for section, model, value in parts:
            try:
                model.model_validate(value.model_dump())
            except ValidationError as exc:
                problems.append(f"{section}: {exc.errors()[0]['msg'].replace('Value error, ', '')}")
        for tag, props in scene.materials.items():
            if not 0.0 < props.poisson < 0.5:
                problems.append(f"materials.{tag}.poisson: poisson out of range")
        if problems:
            return problems
        try:
            Scene.model_validate(scene.model_dump())
            scene.crystal
        except (ValidationError, ValueError) as exc:
            errors = exc.errors() if isinstance(exc, ValidationError) else [{"msg": str(exc)}]
            problems.append(errors[0]["msg"].replace("Value error, ", ""))
        return problems

    def _check_resolution(self, scene: Scene) -> List[str]:
        problems = []
        h = scene.sim.mesh_resolution
        for axis, edge in zip("xyz", scene.crystal.extents):
            ratio = edge / h
            if abs(ratio - round(ratio)) > self.edge_tolerance * max(1.0, ratio):
                problems.append(
                    f"mesh resolution {h * 1e3:g} mm does not divide crystal edge {axis} ({edge * 1e3:g} mm)"
                )
        lows = np.array([p.bounds[0] for p in scene.geometry.primitives])
        highs = np.array([p.bounds[1] for p in scene.geometry.primitives])
        voxels = int(np.prod(np.ceil((highs.max(axis=0) - lows.min(axis=0)) / h + 2)))
        if voxels > scene.sim.max_elements:
            problems.append(f"memory bound exceeded: about {voxels} voxels for a cap of {scene.sim.max_elements}")
        if scene.electrode.thickness < 0.5 * h:
            problems.append("resolution too coarse: electrode thinner than half a voxel")
        return problems

    def _check_path(self, scene: Scene) -> List[str]:
        path = scene.geometry.path
        if path.axis is None:
            return ["path is not aligned with a coordinate axis"]
        points =np.asarray(path.entry) + np.outer(np.linspace(0.0, path.length, _PATH_SAMPLES), path.unit_direction)
        holders = []
        for primitive in scene.geometry.primitives:
            if primitive.material != scene.crystal_material:
                continue
            low, high = primitive.bounds
            if np.all((points >= low - _TOL) & (points <= high + _TOL)):
                holders.append(primitive.name)
        if not holders:
            return ["path leaves the crystal region"]
        if len(holders) > 1:
            return [f"path lies in more than one crystal primitive ({', '.join(holders)})"]
        return []

    def _check_electrodes(self, scene: Scene) -> List[str]:
        mode = scene.electrode
        if mode.transparent:
            return []
        crystal: BoxPrimitive = scene.crystal
        low, high = crystal.bounds
        path = scene.geometry.path
        spacing = scene.sim.mesh_resolution
        for patch in contact_patches(mode, crystal):
            axis = {"x": 0, "y": 1}[patch.face[1]]
            plane = high[axis] if patch.face[0] == "+" else low[axis]
            for point in (np.asarray(path.entry, dtype=float), path.exit):
                if abs(point[axis] - plane) < _TOL and patch.distance_to(point) < spacing * (1.0 - 1e-9):
                    return ["path blocked by metal electrode"]
        return []

    def _check_heater(self, scene: Scene) -> List[str]:
        if not any(p.material == scene.heater_material for p in scene.geometry.primitives):
            return ["no heater-material primitive found"]
        return []


def validate(scene: Scene) -> List[str]:
    """Diagnostics for a scene; empty when it can be simulated as given"""
    return SceneValidator().validate_scene(scene)["diagnostics"]
