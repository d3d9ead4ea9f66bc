"""
Bias-instability normalisation.

A 1/f drift with noise amplitude B_s has PSD (B_s^2 / 2 pi) / f. Taking
f = 1 / tau, the bias instability grows linearly with the total measurement
time: sigma_BI = (B_s^2 / 2 pi) * tau. Drift measured over different
durations is made comparable by removing that factor of tau.
"""

import math
from dataclasses import dataclass

from ..errors import SignalFitError


def _require_positive(name: str, value: float) -> None:
    if not value > 0.0:
        raise SignalFitError(f"{name} must be positive, got {value}")


def bias_psd(noise_amplitude: float, frequency: float) -> float:
    _require_positive("frequency", frequency)
    return noise_amplitude ** 2 / (2.0 * math.pi) / frequency


def bias_instability(noise_amplitude: float, tau: float) -> float:
    _require_positive("tau", tau)
    return noise_amplitude ** 2 / (2.0 * math.pi) * tau


def bias_correct(raw_error: float, tau: float, tau_ref: float) -> float:
    """Rescale drift accumulated over tau to the reference duration tau_ref"""
    _require_positive("tau", tau)
    _require_positive("tau_ref", tau_ref)
    return raw_error * tau_ref / tau


@dataclass(frozen=True)
class BiasStats:
    noise_amplitude: float
    tau: float
    sigma_bi: float
    corrected_error: float

    @classmethod
    def from_noise(cls, noise_amplitude: float, tau: float, raw_error: float) -> "BiasStats":
        """corrected_error is the drift per unit measurement time"""
        return cls(
            noise_amplitude=noise_amplitude,
            tau=tau,
            sigma_bi=bias_instability(noise_amplitude, tau),
            corrected_error=raw_error / tau,
        )
