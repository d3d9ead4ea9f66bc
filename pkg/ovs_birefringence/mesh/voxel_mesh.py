"""
Structured hexahedral meshing of a scene.

Voxels live on a regular grid aligned to the crystal's lower corner. A voxel
takes the material of the last primitive containing its centroid; voxels no
primitive claims are void and are not part of the mesh. Only the nodes of
non-void voxels are numbered.
"""

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .hex_element import FACE_NODES, FACE_NORMALS, NODE_OFFSETS
from ..errors import MeshError
from ..scene.electrodes import electrode_boxes
from ..scene.models import BoxPrimitive, CylinderPrimitive, Scene

logger = logging.getLogger("VoxelMesh")

AnyPrimitive = Union[BoxPrimitive, CylinderPrimitive]

FACE_NEG_Z = 4
_ON_PLANE = 1e-9


@dataclass(frozen=True, eq=False)
class BoundaryFaces:
    """Element faces given as (element id, local face 0..5 in -x,+x,-y,+y,-z,+z order)"""

    elements: np.ndarray
    faces: np.ndarray

    def __len__(self) -> int:
        return int(self.elements.size)

    def node_ids(self, mesh: "VoxelMesh") -> np.ndarray:
        """(n, 4) node ids of each face"""
        return mesh.connectivity[self.elements[:, None], FACE_NODES[self.faces]]

    @classmethod
    def empty(cls) -> "BoundaryFaces":
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class VoxelMesh:
    shape: Tuple[int, int, int]
    spacing: float
    origin: np.ndarray
    material_names: Tuple[str, ...]
    element_material: np.ndarray
    element_terminal: np.ndarray
    element_ijk: np.ndarray
    grid: np.ndarray
    connectivity: np.ndarray
    node_coords: np.ndarray
    heater_base: Optional[BoundaryFaces] = None
    convective: Optional[BoundaryFaces] = None
    electrode_contacts: Tuple[np.ndarray, ...] = ()
    crystal_material: Optional[str] = None
    diagnostics: Tuple[str, ...] = field(default=())

    @property
    def n_elements(self) -> int:
        return int(self.element_material.size)

    @property
    def n_nodes(self) -> int:
        return int(self.node_coords.shape[0])

    @property
    def classified(self) -> bool:
        return self.heater_base is not None

    @property
    def element_volume(self) -> float:
        return self.spacing ** 3

    @property
    def element_centroids(self) -> np.ndarray:
        return self.origin + (self.element_ijk + 0.5) * self.spacing

    def material_index(self, tag: str) -> int:
        return self.material_names.index(tag) if tag in self.material_names else -1

    def material_mask(self, tag: str) -> np.ndarray:
        return self.element_material == self.material_index(tag)

    def crystal_mask(self) -> np.ndarray:
        if self.crystal_material is None:
            raise MeshError("mesh has no crystal material; classify boundaries first")
        return self.material_mask(self.crystal_material)

    def per_element(self, values: Mapping[str, float]) -> np.ndarray:
        """Broadcast a per-material value to every element"""
        missing = [name for name in self.material_names if name not in values]
        if missing:
            raise MeshError(f"no value for material(s) {', '.join(missing)}")
        table = np.array([values[name] for name in self.material_names], dtype=float)
        return table[self.element_material]

    def material_volume(self, tag: str) -> float:
        return float(np.count_nonzero(self.material_mask(tag))) * self.element_volume

    def exterior_faces(self) -> BoundaryFaces:
        padded = np.pad(self.grid, 1, constant_values=-1)
        elements, faces = [], []
        for face, normal in enumerate(FACE_NORMALS):
            neighbour = self.element_ijk + 1 + normal
            outside = padded[neighbour[:, 0], neighbour[:, 1], neighbour[:, 2]] < 0
            ids = np.nonzero(outside)[0]
            elements.append(ids)
            faces.append(np.full(ids.size, face))
        return BoundaryFaces(np.concatenate(elements), np.concatenate(faces))

    def locate(self, point: Sequence[float]) -> int:
        """Element containing a point (upper faces belong to the last layer), -1 outside"""
        rel = (np.asarray(point, dtype=float) - self.origin) / self.spacing
        ijk = np.floor(rel).astype(int)
        shape = np.asarray(self.shape)
        at_top = np.isclose(rel, shape, rtol=0.0, atol=_ON_PLANE)
        ijk[at_top] = shape[at_top] - 1
        if np.any(ijk < 0) or np.any(ijk >= shape):
            return -1
        return int(self.grid[tuple(ijk)])


def voxelize_primitives(
    primitives: Sequence[Union[AnyPrimitive, Tuple[AnyPrimitive, int]]],
    spacing: float,
    anchor: Optional[Sequence[float]] = None,
    max_elements: int = 2_000_000,
) -> VoxelMesh:
    """
    Voxelize an ordered primitive list

    Args:
        primitives: primitives, or (primitive, electrode terminal) pairs
        spacing: voxel edge length in m
        anchor: a point that must fall on a grid node (defaults to the bounding-box corner)
        max_elements: cap on grid voxels before anything is allocated

    Returns:
        Unclassified VoxelMesh
    """
    items = [p if isinstance(p, tuple) else (p, -1) for p in primitives]
    if not items:
        raise MeshError("missing geometry: nothing to voxelize")
    lows = np.array([p.bounds[0] for p, _ in items])
    highs = np.array([p.bounds[1] for p, _ in items])
    low, high = lows.min(axis=0), highs.max(axis=0)
    anchor = low if anchor is None else np.asarray(anchor, dtype=float)
    origin = anchor - spacing * np.ceil((anchor - low) / spacing - _ON_PLANE)
    shape = np.maximum(np.ceil((high - origin) / spacing - _ON_PLANE).astype(int), 1)
    total = int(np.prod(shape))
    if total > max_elements:
        raise MeshError(
            f"memory bound exceeded: grid of {total} voxels is above the cap of {max_elements}"
        )

    axes = [origin[a] + (np.arange(shape[a]) + 0.5) * spacing for a in range(3)]
    centroids = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    material = np.full(tuple(shape), -1, dtype=np.int64)
    terminal = np.full(tuple(shape), -1, dtype=np.int64)
    names: List[str] = []
    for primitive, term in items:
        if primitive.material not in names:
            names.append(primitive.material)
        mask = primitive.contains(centroids)
        material[mask] = names.index(primitive.material)
        terminal[mask] = term

    element_ijk = np.argwhere(material >= 0)
    grid = np.full(tuple(shape), -1, dtype=np.int64)
    grid[tuple(element_ijk.T)] = np.arange(len(element_ijk))

    used = np.zeros(tuple(shape + 1), dtype=bool)
    for offset in NODE_OFFSETS:
        corner = element_ijk + offset
        used[tuple(corner.T)] = True
    node_ijk = np.argwhere(used)
    node_index = np.full(used.shape, -1, dtype=np.int64)
    node_index[tuple(node_ijk.T)] = np.arange(len(node_ijk))
    connectivity = np.stack(
        [node_index[tuple((element_ijk + offset).T)] for offset in NODE_OFFSETS], axis=1
    )

    mesh = VoxelMesh(
        shape=tuple(int(n) for n in shape),
        spacing=float(spacing),
        origin=origin,
        material_names=tuple(names),
        element_material=material[tuple(element_ijk.T)],
        element_terminal=terminal[tuple(element_ijk.T)],
        element_ijk=element_ijk,
        grid=grid,
        connectivity=connectivity,
        node_coords=origin + node_ijk * spacing,
    )
    logger.debug(f"Voxelized {mesh.n_elements} elements, {mesh.n_nodes} nodes on grid {mesh.shape}")
    return mesh


def voxelize(scene: Scene) -> VoxelMesh:
    """Voxelize scene primitives plus the electrode slabs of its mode"""
    spacing = scene.sim.mesh_resolution
    items: List[Tuple[AnyPrimitive, int]] = [(p, -1) for p in scene.geometry.primitives]
    items += [(part.box, part.terminal) for part in electrode_boxes(scene, spacing)]
    return voxelize_primitives(
        items, spacing, anchor=scene.crystal.bounds[0], max_elements=scene.sim.max_elements
    )


def classify_faces(mesh: VoxelMesh, heater_material: str, crystal_material: Optional[str] = None) -> VoxelMesh:
    """Split exterior faces into heater base and convective sets; collect electrode contacts"""
    exterior = mesh.exterior_faces()
    diagnostics = list(mesh.diagnostics)

    heater_index = mesh.material_index(heater_material)
    if heater_index < 0:
        diagnostics.append("no heater-material primitive found")
        logger.warning(f"No '{heater_material}' elements; heater base left empty")
        is_base = np.zeros(len(exterior), dtype=bool)
    else:
        is_base = (exterior.faces == FACE_NEG_Z) & (mesh.element_material[exterior.elements] == heater_index)
    heater_base = BoundaryFaces(exterior.elements[is_base], exterior.faces[is_base])
    convective = BoundaryFaces(exterior.elements[~is_base], exterior.faces[~is_base])

    contacts: Tuple[np.ndarray, ...] = ()
    crystal_index = mesh.material_index(crystal_material) if crystal_material else -1
    terminals = sorted(set(mesh.element_terminal[mesh.element_terminal >= 0].tolist()))
    if crystal_index >= 0 and terminals:
        crystal = np.nonzero(mesh.element_material == crystal_index)[0]
        padded = np.pad(mesh.grid, 1, constant_values=-1)
        per_terminal: List[List[np.ndarray]] = [[] for _ in range(max(terminals) + 1)]
        for face, normal in enumerate(FACE_NORMALS):
            neighbour_ijk = mesh.element_ijk[crystal] + 1 + normal
            neighbour = padded[tuple(neighbour_ijk.T)]
            touching = neighbour >= 0
            owner = np.full(crystal.size, -1)
            owner[touching] = mesh.element_terminal[neighbour[touching]]
            for term in terminals:
                hit = crystal[owner == term]
                per_terminal[term].append(mesh.connectivity[hit][:, FACE_NODES[face]].ravel())
        contacts = tuple(np.unique(np.concatenate(parts)) for parts in per_terminal)

    return replace(
        mesh,
        heater_base=heater_base,
        convective=convective,
        electrode_contacts=contacts,
        crystal_material=crystal_material,
        diagnostics=tuple(diagnostics),
    )


def classify_boundaries(mesh: VoxelMesh, scene: Scene) -> VoxelMesh:
    return classify_faces(mesh, scene.heater_material, scene.crystal_material)


def build_mesh(scene: Scene) -> VoxelMesh:
    return classify_boundaries(voxelize(scene), scene)


@dataclass(frozen=True, eq=False)
class PathSamples:
    """
    Optical path split at every grid plane it crosses.

    A section lying on an element face or edge belongs to every crystal
    element sharing it (2 or 4 ids); values are averaged over them.
    """

    element_ids: Tuple[Tuple[int, ...], ...]
    cells: Tuple[Tuple[Tuple[int, int, int], ...], ...]
    lengths: np.ndarray
    direction: np.ndarray

    def __len__(self) -> int:
        return len(self.element_ids)

    @property
    def total_length(self) -> float:
        return float(np.sum(self.lengths))

    def average(self, values: np.ndarray) -> np.ndarray:
        """Per-section mean of an element-wise array (first axis = elements)"""
        return np.stack([values[list(ids)].mean(axis=0) for ids in self.element_ids])


def _plane_crossings(entry: np.ndarray, direction: np.ndarray, length: float,
                     origin: np.ndarray, spacing: float) -> List[float]:
    params = [0.0, length]
    end = entry + length * direction
    for axis in range(3):
        if abs(direction[axis]) < 1e-15:
            continue
        lo = min(entry[axis], end[axis])
        hi = max(entry[axis], end[axis])
        first = int(np.floor((lo - origin[axis]) / spacing)) - 1
        last = int(np.ceil((hi - origin[axis]) / spacing)) + 1
        planes = origin[axis] + np.arange(first, last + 1) * spacing
        t = (planes - entry[axis]) / direction[axis]
        params.extend(float(v) for v in t if 0.0 < v < length)
    return sorted(params)


def _candidate_cells(point: np.ndarray, mesh: VoxelMesh) -> Iterable[Tuple[int, int, int]]:
    rel = (point - mesh.origin) / mesh.spacing
    options = []
    for value in rel:
        nearest = round(value)
        if abs(value - nearest) < _ON_PLANE:
            options.append((int(nearest) - 1, int(nearest)))
        else:
            options.append((int(np.floor(value)),))
    return itertools.product(*options)


def optical_path_samples(mesh: VoxelMesh, scene: Scene) -> PathSamples:
    path = scene.geometry.path
    entry = np.asarray(path.entry, dtype=float)
    direction = path.unit_direction
    crystal_index = mesh.material_index(scene.crystal_material)
    params = _plane_crossings(entry, direction, path.length, mesh.origin, mesh.spacing)
    min_length = _ON_PLANE * mesh.spacing

    element_ids, cells, lengths = [], [], []
    start = params[0]
    for stop in params[1:]:
        if stop - start < min_length:
            continue
        middle = entry + direction * (0.5 * (start + stop))
        found_ids, found_cells = [], []
        for cell in _candidate_cells(middle, mesh):
            if any(c < 0 or c >= n for c, n in zip(cell, mesh.shape)):
                continue
            element = int(mesh.grid[cell])
            if element >= 0 and mesh.element_material[element] == crystal_index:
                found_ids.append(element)
                found_cells.append(cell)
        if not found_ids:
            raise MeshError(f"path exits crystal region mid-way near {middle.tolist()}")
        element_ids.append(tuple(found_ids))
        cells.append(tuple(found_cells))
        lengths.append(stop - start)
        start = stop

    return PathSamples(
        element_ids=tuple(element_ids),
        cells=tuple(cells),
        lengths=np.asarray(lengths),
        direction=direction,
    )
