"""Fingerprint projections fed to the learning stage.

x_ad aggregates the Doppler axis into a unit-sum angle-delay map, x_do
aggregates angle and delay into a unit-sum Doppler profile, and x_ma
thresholds x_ad into a binary focus mask.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ParameterError
from .fingerprint import Tbf


@dataclass(frozen=True)
class PreprocessedInputs:
    x_ad: np.ndarray   # (A, N_g), sums to 1
    x_ma: np.ndarray   # (A, N_g), binary
    x_do: np.ndarray   # (N_f,), sums to 1
    gamma: float


def angle_delay(f: Tbf) -> np.ndarray:
    """Doppler-axis aggregation, normalized to unit sum."""
    total = f.total
    if total <= 0:
        raise DegenerateInputError("cannot normalize a zero fingerprint")
    return f.data.sum(axis=2) / total


def doppler(f: Tbf) -> np.ndarray:
    """Angle/delay aggregation, normalized to unit sum."""
    total = f.total
    if total <= 0:
        raise DegenerateInputError("cannot normalize a zero fingerprint")
    return f.data.sum(axis=(0, 1)) / total


def mask(x_ad: np.ndarray, gamma: float) -> np.ndarray:
    """Binary indicator of x_ad >= gamma; larger gamma shrinks the support."""
    if not 0.0 <= gamma <= 1.0:
        raise ParameterError("gamma must lie in [0, 1]")
    return (x_ad >= gamma).astype(np.float64)


def preprocess(f: Tbf, gamma: float = 0.05) -> PreprocessedInputs:
    x_ad = angle_delay(f)
    return PreprocessedInputs(x_ad=x_ad, x_ma=mask(x_ad, gamma),
                              x_do=doppler(f), gamma=gamma)
