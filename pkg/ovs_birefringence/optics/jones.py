"""
Jones-matrix accumulation through polarizer, crystal sections, quarter-wave
plate and analyzer. Intensities are normalised so an unperturbed chain sits at
the static work point 0.5.
"""

import math
from typing import Iterable, Sequence

import numpy as np

from .birefringence import SectionBirefringence

E_IN = np.array([1.0, 0.0], dtype=complex)
# Quarter-wave plate without its 1/sqrt(2); the factor is applied to the intensity.
QWP_UNSCALED = np.array([[1.0, 1.0j], [1.0j, 1.0]])
QWP = QWP_UNSCALED / math.sqrt(2.0)
ANALYZER = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
STATIC_WORK_POINT = 0.5


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]], dtype=complex)


def phase_matrix(delta: float) -> np.ndarray:
    return np.diag([np.exp(0.5j * delta), np.exp(-0.5j * delta)])


def section_jones(section: SectionBirefringence) -> np.ndarray:
    """R(theta)^-1 P(delta) R(theta) with theta the signed slow-axis angle"""
    if section.delta_m == 0.0:
        return np.eye(2, dtype=complex)
    r = rotation(section.slow_axis)
    return r.conj().T @ phase_matrix(section.delta_m) @ r


def chain_matrix(sections: Iterable[SectionBirefringence]) -> np.ndarray:
    """Product J_last ... J_first of the sections in entry-to-exit order"""
    total = np.eye(2, dtype=complex)
    for section in sections:
        total = section_jones(section) @ total
    return total


def output_field(sections: Sequence[SectionBirefringence]) -> np.ndarray:
    return ANALYZER @ QWP @ chain_matrix(sections) @ E_IN


def propagate(sections: Sequence[SectionBirefringence]) -> float:
    """Normalised output intensity E_out . conj(E_out)"""
    field = ANALYZER @ QWP_UNSCALED @ chain_matrix(sections) @ E_IN
    return 0.5 * float(np.real(np.vdot(field, field)))


def birefringence_error(sections: Sequence[SectionBirefringence]) -> float:
    return propagate(sections) - STATIC_WORK_POINT


def chain_retardance(matrix: np.ndarray) -> float:
    """Net retardance in [0, 2*pi] of a unit-determinant retarder chain (trace identity)"""
    half_trace = float(np.real(np.trace(matrix))) / 2.0
    return 2.0 * math.acos(min(1.0, max(-1.0, half_trace)))
