"""
Coordinate transforms between the simulation frame and the cubic crystal frame.

Light travels along simulation x, which is crystal [-110]; simulation y is
crystal [110]. Six-vectors use Voigt order (11, 22, 33, 12, 23, 13) without
shear doubling, so B23 = q44 * sigma23 holds component for component.
"""

from dataclasses import dataclass

import numpy as np

from ..scene.models import OpticalProps

_A = np.sqrt(2.0) / 2.0

# Simulation -> crystal rotation; symmetric and orthogonal, so it is its own inverse.
CRYSTAL_ROTATION = np.array([
    [-_A, _A, 0.0],
    [_A, _A, 0.0],
    [0.0, 0.0, 1.0],
])

# Six-vector stress transform as used for the photoelastic matrix.
STRESS_TRANSFORM = np.array([
    [0.5, 0.5, 0.0, 0.0, 0.0, -0.5],
    [0.5, 0.5, 0.0, 0.0, 0.0, 0.5],
    [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, _A, _A, 0.0],
    [0.0, 0.0, 0.0, _A, -_A, 0.0],
    [-0.5, 0.5, 0.0, 0.0, 0.0, 0.0],
])

VOIGT_PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2))


@dataclass(frozen=True, eq=False)
class TransformSet:
    rotation: np.ndarray
    stress_transform: np.ndarray
    crystal_matrix: np.ndarray
    simulation_matrix: np.ndarray


def crystal_photoelastic_matrix(q11: float, q12: float, q44: float) -> np.ndarray:
    matrix = np.zeros((6, 6))
    matrix[:3, :3] = q12
    np.fill_diagonal(matrix[:3, :3], q11)
    matrix[3:, 3:] = np.eye(3) * q44
    return matrix


def build_transforms(optics: OpticalProps) -> TransformSet:
    crystal = crystal_photoelastic_matrix(optics.q11, optics.q12, optics.q44)
    simulation = STRESS_TRANSFORM @ crystal @ np.linalg.inv(STRESS_TRANSFORM)
    return TransformSet(
        rotation=CRYSTAL_ROTATION.copy(),
        stress_transform=STRESS_TRANSFORM.copy(),
        crystal_matrix=crystal,
        simulation_matrix=simulation,
    )


def delta_b_from_stress(stress: np.ndarray, transforms: TransformSet) -> np.ndarray:
    """Index-ellipsoid perturbation six-vector(s) from simulation-frame stress"""
    return np.asarray(stress, dtype=float) @ transforms.simulation_matrix.T


def to_voigt(tensor: np.ndarray) -> np.ndarray:
    return np.array([tensor[i, j] for i, j in VOIGT_PAIRS])


def from_voigt(vector: np.ndarray) -> np.ndarray:
    tensor = np.zeros((3, 3))
    for value, (i, j) in zip(vector, VOIGT_PAIRS):
        tensor[i, j] = tensor[j, i] = value
    return tensor


def electrooptic_crystal_tensor(field_crystal: np.ndarray, r41: float) -> np.ndarray:
    """Pockels perturbation of a 43m-class crystal: shear slots only"""
    e1, e2, e3 = field_crystal
    return from_voigt(np.array([0.0, 0.0, 0.0, r41 * e3, r41 * e1, r41 * e2]))


def electrooptic_delta_b(field: np.ndarray, optics: OpticalProps) -> np.ndarray:
    """Simulation-frame six-vector perturbation for a simulation-frame field (V/m)"""
    field = np.asarray(field, dtype=float)
    crystal = electrooptic_crystal_tensor(CRYSTAL_ROTATION @ field, optics.r41)
    return to_voigt(CRYSTAL_ROTATION.T @ crystal @ CRYSTAL_ROTATION)
