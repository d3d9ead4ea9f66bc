import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

# Transverse index pair and the Voigt slots of (Bjj, Bkk, Bjk) for each propagation axis.
TRANSVERSE = {
    "x": ((1, 2), (1, 2, 4)),
    "y": ((0, 2), (0, 2, 5)),
    "z": ((0, 1), (0, 1, 3)),
}


@dataclass(frozen=True)
class SectionBirefringence:
    """
    Birefringence of one homogeneous path section.

    theta is the reported axis rotation in [0, pi/4]; slow_axis is the signed
    slow-axis angle in (-pi/2, pi/2] used to build the section's Jones matrix.
    """

    delta_n: float
    theta: float
    delta_m: float
    length: float
    slow_axis: float

    @classmethod
    def retarder(cls, delta: float, slow_axis: float = math.pi / 4, length: float = 0.0) -> "SectionBirefringence":
        """Ideal retarder of phase delta; delta_n is left at zero"""
        theta = abs(slow_axis) % (math.pi / 2)
        theta = min(theta, math.pi / 2 - theta)
        return cls(delta_n=0.0, theta=theta, delta_m=delta, length=length, slow_axis=slow_axis)


def transverse_components(delta_b: np.ndarray, axis: str = "x") -> Tuple[float, float, float]:
    if axis not in TRANSVERSE:
        raise ValueError(f"propagation axis must be x, y or z, got {axis!r}")
    jj, kk, jk = TRANSVERSE[axis][1]
    return float(delta_b[jj]), float(delta_b[kk]), float(delta_b[jk])


def _fold(angle: float) -> float:
    """Fold an axis angle into (-pi/2, pi/2]"""
    while angle <= -math.pi / 2:
        angle += math.pi
    while angle > math.pi / 2:
        angle -= math.pi
    return angle


def principal_birefringence(
    delta_b: np.ndarray,
    axis: str = "x",
    n0: float = 2.07,
    length: float = 0.0,
    wavelength: float = 976e-9,
    exact: bool = False,
) -> SectionBirefringence:
    """
    Birefringence seen by light along `axis` for a perturbation six-vector

    Args:
        delta_b: (11, 22, 33, 12, 23, 13) perturbation of the index ellipsoid
        n0: unperturbed index
        length: section length in m (delta_m is 0 when omitted)
        exact: use the eigenvalues of the perturbed transverse ellipse instead
            of the first-order form

    Returns:
        SectionBirefringence
    """
    bjj, bkk, bjk = transverse_components(delta_b, axis)
    split = bjj - bkk
    radius = math.hypot(split, 2.0 * bjk)

    if exact:
        base = 1.0 / n0 ** 2
        mean = base + 0.5 * (bjj + bkk)
        low, high = mean - 0.5 * radius, mean + 0.5 * radius
        delta_n = abs(low ** -0.5 - high ** -0.5)
    else:
        delta_n = 0.5 * n0 ** 3 * radius

    theta = 0.5 * math.atan2(abs(2.0 * bjk), abs(split))
    # Larger-B principal axis is the fast one; slow axis is perpendicular to it.
    slow_axis = _fold(0.5 * math.atan2(2.0 * bjk, split) + math.pi / 2)
    delta_m = 2.0 * math.pi * length * delta_n / wavelength
    return SectionBirefringence(delta_n=delta_n, theta=theta, delta_m=delta_m, length=length, slow_axis=slow_axis)


def make_section(delta_b: np.ndarray, length: float, wavelength: float, n0: float,
                 axis: str = "x", exact: bool = False) -> SectionBirefringence:
    return principal_birefringence(delta_b, axis=axis, n0=n0, length=length, wavelength=wavelength, exact=exact)
