"""
Trilinear 8-node brick on a cube of unit edge.

Every voxel in the mesh is the same cube scaled by the spacing h, so element
matrices are computed once here and scaled at assembly:
conduction and Laplace stiffness scale with h, elastic stiffness with h,
the thermal load operator with h^2, and centroid gradients with 1/h.
"""

import numpy as np

# Local node order: bottom face counter-clockwise, then top face.
NODE_SIGNS = np.array([
    [-1, -1, -1], [1, -1, -1], [1, 1, -1], [-1, 1, -1],
    [-1, -1, 1], [1, -1, 1], [1, 1, 1], [-1, 1, 1],
], dtype=float)

# Grid offsets (di, dj, dk) of each local node from the element's lowest corner.
NODE_OFFSETS = ((NODE_SIGNS + 1) // 2).astype(int)

# Faces in the order -x, +x, -y, +y, -z, +z.
FACE_NODES = np.array([
    [0, 3, 7, 4],
    [1, 2, 6, 5],
    [0, 1, 5, 4],
    [3, 2, 6, 7],
    [0, 1, 2, 3],
    [4, 5, 6, 7],
])
FACE_NORMALS = np.array([
    [-1, 0, 0], [1, 0, 0],
    [0, -1, 0], [0, 1, 0],
    [0, 0, -1], [0, 0, 1],
])

_GAUSS = np.array([-1.0, 1.0]) / np.sqrt(3.0)
GAUSS_POINTS = np.array([[a, b, c] for c in _GAUSS for b in _GAUSS for a in _GAUSS])
# Weight of each 2x2x2 point in physical units on the unit cube: (1/2)^3.
GAUSS_WEIGHT = 0.125


def shape_functions(xi: np.ndarray) -> np.ndarray:
    """N_a at a reference point xi in [-1, 1]^3"""
    return 0.125 * np.prod(1.0 + NODE_SIGNS * xi, axis=1)


def shape_gradients(xi: np.ndarray) -> np.ndarray:
    """(3, 8) physical gradients dN_a/dx on the unit cube"""
    factors = 1.0 + NODE_SIGNS * xi
    grads = np.empty((3, 8))
    for axis in range(3):
        others = [k for k in range(3) if k != axis]
        grads[axis] = 0.125 * NODE_SIGNS[:, axis] * factors[:, others[0]] * factors[:, others[1]]
    # d(xi)/dx = 2 on the unit cube.
    return 2.0 * grads


def strain_operator(grads: np.ndarray) -> np.ndarray:
    """(6, 24) B matrix; rows 11, 22, 33, 2*12, 2*23, 2*13 (engineering shear)"""
    b = np.zeros((6, 24))
    for a in range(8):
        dx, dy, dz = grads[:, a]
        col = 3 * a
        b[0, col] = dx
        b[1, col + 1] = dy
        b[2, col + 2] = dz
        b[3, col], b[3, col + 1] = dy, dx
        b[4, col + 1], b[4, col + 2] = dz, dy
        b[5, col], b[5, col + 2] = dz, dx
    return b


_TRACE = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
_SHEAR_MODULUS_PATTERN = np.diag([2.0, 2.0, 2.0, 1.0, 1.0, 1.0])


def _build_reference_matrices():
    laplace = np.zeros((8, 8))
    stiff_lambda = np.zeros((24, 24))
    stiff_mu = np.zeros((24, 24))
    thermal_load = np.zeros((24, 8))
    for xi in GAUSS_POINTS:
        grads = shape_gradients(xi)
        b = strain_operator(grads)
        n = shape_functions(xi)
        laplace += GAUSS_WEIGHT * grads.T @ grads
        stiff_lambda += GAUSS_WEIGHT * b.T @ np.outer(_TRACE, _TRACE) @ b
        stiff_mu += GAUSS_WEIGHT * b.T @ _SHEAR_MODULUS_PATTERN @ b
        thermal_load += GAUSS_WEIGHT * np.outer(b.T @ _TRACE, n)
    return laplace, stiff_lambda, stiff_mu, thermal_load


LAPLACE, STIFFNESS_LAMBDA, STIFFNESS_MU, THERMAL_LOAD = _build_reference_matrices()

CENTROID_GRADIENTS = shape_gradients(np.zeros(3))
CENTROID_STRAIN = strain_operator(CENTROID_GRADIENTS)
