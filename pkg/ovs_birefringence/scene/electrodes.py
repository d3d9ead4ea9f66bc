"""
Electrode geometry for one mode.

Terminal 0 (+V/2) wraps the crystal's +x/+y corner, terminal 1 (-V/2) the
opposite -x/-y corner. ratio_x millimetres run along x on the y-face and
ratio_y millimetres run along y on the x-face, each covering the full crystal
height. Plates (10:0, 0:10) are the special case with one run empty.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .models import BoxPrimitive, ElectrodeMode, Scene
from ..errors import MeshError

MM = 1e-3


@dataclass(frozen=True)
class ContactPatch:
    """Rectangle of a crystal face covered by one electrode terminal"""

    terminal: int
    face: str            # '+x', '-x', '+y' or '-y'
    low: np.ndarray
    high: np.ndarray

    def distance_to(self, point: np.ndarray) -> float:
        """In-plane distance from a point on the same face to the patch"""
        gap = np.maximum(self.low - point, 0.0) + np.maximum(point - self.high, 0.0)
        gap[_FACE_AXIS[self.face]] = 0.0
        return float(np.linalg.norm(gap))


@dataclass(frozen=True)
class ElectrodeBox:
    terminal: int
    box: BoxPrimitive


_FACE_AXIS = {"+x": 0, "-x": 0, "+y": 1, "-y": 1}


def _runs(mode: ElectrodeMode, crystal: BoxPrimitive) -> Tuple[float, float]:
    """Run lengths in metres, clipped to the crystal faces"""
    extent = crystal.extents
    return min(mode.ratio_x * MM, extent[0]), min(mode.ratio_y * MM, extent[1])


def contact_patches(mode: ElectrodeMode, crystal: BoxPrimitive) -> List[ContactPatch]:
    (x0, y0, z0), (x1, y1, z1) = crystal.bounds
    run_x, run_y = _runs(mode, crystal)
    patches = []
    if run_x > 0.0:
        patches.append(ContactPatch(0, "+y", np.array([x1 - run_x, y1, z0]), np.array([x1, y1, z1])))
        patches.append(ContactPatch(1, "-y", np.array([x0, y0, z0]), np.array([x0 + run_x, y0, z1])))
    if run_y > 0.0:
        patches.append(ContactPatch(0, "+x", np.array([x1, y1 - run_y, z0]), np.array([x1, y1, z1])))
        patches.append(ContactPatch(1, "-x", np.array([x0, y0, z0]), np.array([x0, y0 + run_y, z1])))
    return patches


def electrode_layers(mode: ElectrodeMode, spacing: float) -> int:
    if mode.thickness < 0.5 * spacing:
        raise MeshError(
            f"resolution too coarse: electrode thickness {mode.thickness:g} m "
            f"is thinner than half a voxel ({spacing:g} m)"
        )
    return max(1, int(round(mode.thickness / spacing)))


def electrode_boxes(scene: Scene, spacing: float) -> List[ElectrodeBox]:
    """Voxel-aligned slabs standing on each contact patch, outward from the crystal"""
    mode = scene.electrode
    thickness = electrode_layers(mode, spacing) * spacing
    boxes = []
    for index, patch in enumerate(contact_patches(mode, scene.crystal)):
        axis = _FACE_AXIS[patch.face]
        low, high = patch.low.copy(), patch.high.copy()
        if patch.face.startswith("+"):
            high[axis] = low[axis] + thickness
        else:
            low[axis] = high[axis] - thickness
        boxes.append(ElectrodeBox(
            terminal=patch.terminal,
            box=BoxPrimitive(
                name=f"electrode_{patch.terminal}_{index}",
                material=mode.material,
                origin=tuple(float(v) for v in low),
                extents=tuple(float(v) for v in high - low),
            ),
        ))
    return boxes
