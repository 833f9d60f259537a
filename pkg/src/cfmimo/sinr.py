"""Per-user SINR/SE container shared by the uplink and downlink formulas."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SinrVector:
    """Per-user effective SINR (linear) and the spectral efficiency it bounds.

    se = log2(1 + gamma) in bits/s/Hz. Entries may be inf in idealized
    noiseless/perfect-CSI limits and 0 for unreachable users.
    """

    gamma: np.ndarray  # (K,)
    se: np.ndarray     # (K,)

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=float)
        self.se = np.asarray(self.se, dtype=float)
        if np.any(self.gamma < 0):
            raise ValueError("SINR must be nonnegative")

    @classmethod
    def from_gamma(cls, gamma: np.ndarray) -> "SinrVector":
        gamma = np.asarray(gamma, dtype=float)
        with np.errstate(over="ignore"):
            se = np.log2(1.0 + gamma)
        return cls(gamma=gamma, se=se)

    @property
    def sum_se(self) -> float:
        return float(np.sum(self.se))


def safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """Elementwise num/den with 0/0 -> 0 and x/0 -> inf for x > 0."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.zeros(np.broadcast(num, den).shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = num / den
    np.copyto(out, ratio, where=(num != 0))
    np.copyto(out, np.inf, where=(num > 0) & (den == 0))
    return out
