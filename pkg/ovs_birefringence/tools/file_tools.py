import csv
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from ..errors import ConfigError
from ..mesh.voxel_mesh import VoxelMesh
from ..signal_analysis.waveform import Waveform

logger = logging.getLogger("FileTools")

VTK_HEXAHEDRON = 12
HASH_PREFIX = "# config_sha256="
_UNIFORM_TOLERANCE = 1e-6


def format_value(value: Any) -> str:
    """Deterministic text for one CSV cell"""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


class FileTools:
    """Writers for run outputs; every data file is reproducible byte for byte"""

    def __init__(self, out_dir: str = "results"):
        self.out_dir = out_dir
        self.written: List[str] = []

    def ensure_out_dir(self) -> None:
        """Create output directory if it doesn't exist"""
        os.makedirs(self.out_dir, exist_ok=True)

    def path(self, filename: str) -> str:
        return os.path.join(self.out_dir, filename)

    def _record(self, filepath: str) -> str:
        self.written.append(filepath)
        logger.debug(f"Wrote {filepath}")
        return filepath

    def write_csv(
        self,
        filename: str,
        header: Sequence[str],
        rows: Iterable[Sequence[Any]],
        config_hash: Optional[str] = None,
    ) -> str:
        """
        Write a CSV data file

        Args:
            filename: file name inside the output directory
            header: column names
            rows: data rows
            config_hash: written as a leading comment line when given

        Returns:
            Path to the written file
        """
        self.ensure_out_dir()
        filepath = self.path(filename)
        with open(filepath, "w", encoding="utf-8", newline="") as f:
            if config_hash is not None:
                f.write(f"{HASH_PREFIX}{config_hash}\n")
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(value) for value in row])
        return self._record(filepath)

    def write_vtk(
        self,
        mesh: VoxelMesh,
        filename: str = "mesh.vtk",
        config_hash: Optional[str] = None,
        include_electrode: bool = False,
    ) -> str:
        """Legacy ASCII unstructured grid with a material cell scalar (and terminal id)"""
        self.ensure_out_dir()
        filepath = self.path(filename)
        lines = [
            "# vtk DataFile Version 3.0",
            f"ovs-birefringence mesh config_sha256={config_hash or 'none'}",
            "ASCII",
            "DATASET UNSTRUCTURED_GRID",
            f"POINTS {mesh.n_nodes} double",
        ]
        lines.extend(" ".join(format_value(float(c)) for c in point) for point in mesh.node_coords)
        lines.append(f"CELLS {mesh.n_elements} {mesh.n_elements * 9}")
        lines.extend("8 " + " ".join(str(int(n)) for n in cell) for cell in mesh.connectivity)
        lines.append(f"CELL_TYPES {mesh.n_elements}")
        lines.extend([str(VTK_HEXAHEDRON)] * mesh.n_elements)
        lines.append(f"CELL_DATA {mesh.n_elements}")
        lines += ["SCALARS material int 1", "LOOKUP_TABLE default"]
        lines.extend(str(int(m)) for m in mesh.element_material)
        if include_electrode:
            lines += ["SCALARS electrode int 1", "LOOKUP_TABLE default"]
            lines.extend(str(int(t)) for t in mesh.element_terminal)
        with open(filepath, "w", encoding="utf-8", newline="\n") as f:
            f.write("\n".join(lines) + "\n")
        return self._record(filepath)

    def save_manifest(self, manifest: Dict[str, Any], filename: str = "manifest.json") -> str:
        self.ensure_out_dir()
        filepath = self.path(filename)
        with open(filepath, "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2, ensure_ascii=False)
        return filepath

    def load_from_file(self, filepath: str) -> Dict[str, Any]:
        with open(filepath, "r", encoding="utf-8") as f:
            return json.load(f)


def read_csv_rows(filepath: str) -> List[List[str]]:
    """Rows of a CSV file without comment lines"""
    with open(filepath, "r", encoding="utf-8", newline="") as f:
        return [row for row in csv.reader(line for line in f if not line.startswith("#")) if row]


def read_trace(filepath: str) -> Waveform:
    """
    Load a uniformly sampled (time, intensity) trace

    Args:
        filepath: two-column CSV; a non-numeric first row is taken as a header

    Returns:
        Waveform with the sample rate inferred from the time step
    """
    if not Path(filepath).is_file():
        raise ConfigError(f"trace not found: {filepath}")
    rows = read_csv_rows(filepath)
    if rows:
        try:
            float(rows[0][0])
        except ValueError:
            rows = rows[1:]
    try:
        data = np.array([[float(row[0]), float(row[1])] for row in rows], dtype=float)
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"trace {filepath} must hold two numeric columns") from exc
    if data.shape[0] < 2:
        raise ConfigError(f"trace {filepath} holds fewer than two samples")

    steps = np.diff(data[:, 0])
    step = float(np.median(steps))
    if step <= 0.0 or np.max(np.abs(steps - step)) > _UNIFORM_TOLERANCE * step + 1e-15:
        raise ConfigError(f"trace {filepath} is not uniformly sampled")
    return Waveform(times=data[:, 0], intensity=data[:, 1], sample_rate=1.0 / step)
