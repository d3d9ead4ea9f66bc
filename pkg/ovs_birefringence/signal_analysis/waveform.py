"""
Sensor output under AC drive and drift extraction.

The drive enters as an ideal 45-degree retarder of phase pi * V / V_half
placed ahead of the stress sections, so with no stress the output is
(1 + sin(pi * V / V_half)) / 2.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ..errors import SignalFitError
from ..optics.birefringence import SectionBirefringence
from ..optics.jones import ANALYZER, STATIC_WORK_POINT, QWP_UNSCALED, chain_matrix
from ..scene.models import SignalParams

logger = logging.getLogger("SignalAnalysis")

MIN_PERIODS = 4

SectionSource = Union[Sequence[SectionBirefringence], Callable[[float], Sequence[SectionBirefringence]]]
VoltageSource = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, float]


@dataclass(frozen=True, eq=False)
class Waveform:
    times: np.ndarray
    intensity: np.ndarray
    sample_rate: float

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate


@dataclass(frozen=True)
class DriftFit:
    """I(t) = amplitude * cos(2 pi f t + phase) + a t^2 + b t + c"""

    amplitude: float
    phase: float
    a: float
    b: float
    c: float
    residual_rms: float
    mean_dc: float

    def dc(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.a * t ** 2 + self.b * t + self.c

    @property
    def birefringence_error(self) -> float:
        return self.mean_dc - STATIC_WORK_POINT


def sample_times(params: SignalParams) -> np.ndarray:
    count = int(round(params.window * params.sample_rate))
    return np.arange(count) / params.sample_rate


def _voltages(voltage: VoltageSource, times: np.ndarray) -> np.ndarray:
    if callable(voltage):
        values = np.asarray(voltage(times), dtype=float)
    else:
        values = np.asarray(voltage, dtype=float)
    values = np.broadcast_to(values, times.shape).astype(float)
    return values


def drive(amplitude: float, frequency: float, phase: float = 0.0) -> Callable[[np.ndarray], np.ndarray]:
    """Sinusoidal drive voltage"""
    return lambda t: amplitude * np.cos(2.0 * math.pi * frequency * np.asarray(t) + phase)


def synthesize(
    sections_at_time: SectionSource,
    voltage: VoltageSource,
    hwv: float,
    params: Optional[SignalParams] = None,
    times: Optional[np.ndarray] = None,
) -> Waveform:
    """
    Output intensity samples for a drive voltage and the stress chain

    Args:
        sections_at_time: stress sections, or a callable t -> sections for a
            chain that drifts during the window
        voltage: callable t -> V, an array matching the sample times, or a constant
        hwv: half-wave voltage in V
        params: window and sample rate (defaults to 160 ms at 100 kHz)
        times: explicit sample times, overriding params.window

    Returns:
        Waveform
    """
    if not hwv > 0.0:
        raise ValueError("half-wave voltage must be positive")
    params = params or SignalParams()
    times = sample_times(params) if times is None else np.asarray(times, dtype=float)
    half_phase = 0.5 * math.pi * _voltages(voltage, times) / hwv
    # Modulation retarder at 45 degrees acting on E_in = (1, 0).
    modulated = np.stack([np.cos(half_phase), 1.0j * np.sin(half_phase)], axis=1)

    if callable(sections_at_time):
        fields = np.empty((times.size, 2), dtype=complex)
        for index, t in enumerate(times):
            optics = ANALYZER @ QWP_UNSCALED @ chain_matrix(sections_at_time(float(t)))
            fields[index] = optics @ modulated[index]
    else:
        optics = ANALYZER @ QWP_UNSCALED @ chain_matrix(sections_at_time)
        fields = modulated @ optics.T

    intensity = 0.5 * np.sum(np.abs(fields) ** 2, axis=1)
    return Waveform(times=times, intensity=intensity, sample_rate=float(params.sample_rate))


def fit_drift(waveform: Waveform, drive_frequency: float) -> DriftFit:
    """Linear least squares on {cos, sin, t^2, t, 1}"""
    t = waveform.times
    if t.size < 5 or waveform.duration * drive_frequency < MIN_PERIODS - 1e-9:
        raise SignalFitError(
            f"window of {waveform.duration:.4g} s holds fewer than {MIN_PERIODS} periods at {drive_frequency} Hz"
        )
    omega = 2.0 * math.pi * drive_frequency
    design = np.column_stack([np.cos(omega * t), np.sin(omega * t), t ** 2, t, np.ones_like(t)])
    coefficients, _, rank, _ = np.linalg.lstsq(design, waveform.intensity, rcond=None)
    if rank < design.shape[1]:
        raise SignalFitError(f"rank-deficient design matrix (rank {rank} of {design.shape[1]})")

    cos_part, sin_part, a, b, c = (float(v) for v in coefficients)
    residual = waveform.intensity - design @ coefficients
    amplitude = math.hypot(cos_part, sin_part)
    phase = math.atan2(-sin_part, cos_part) if amplitude > 0.0 else 0.0
    fit = DriftFit(
        amplitude=amplitude,
        phase=phase,
        a=a,
        b=b,
        c=c,
        residual_rms=float(np.sqrt(np.mean(residual ** 2))),
        mean_dc=float(np.mean(a * t ** 2 + b * t + c)),
    )
    logger.debug(f"Drift fit: I_AC={fit.amplitude:.4g}, phi={fit.phase:.4g}, rms={fit.residual_rms:.2e}")
    return fit
