from .bias import BiasStats, bias_correct
from .waveform import DriftFit, Waveform, fit_drift, synthesize

__all__ = ["Waveform", "DriftFit", "synthesize", "fit_drift", "BiasStats", "bias_correct"]
