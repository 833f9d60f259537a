"""Small-scale fading: MMSE estimate/error draws for the link-level oracles.

Estimation is simulated by drawing the estimate and the error directly from
their output distributions (variances alpha and beta - alpha): statistically
identical to running the estimator on pilots, without an extra pilot-length
parameter. Estimate and error are independent, which is exactly the
orthogonality every closed form here relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import LargeScaleState, SimulationConfig


@dataclass
class ChannelDraw:
    """One realization of estimates, errors and the true channel (all M x K)."""

    g_hat: np.ndarray
    g_err: np.ndarray
    g_true: np.ndarray


def expand_to_antennas(per_ap_matrix: np.ndarray, n_t: int) -> np.ndarray:
    """Replicate each AP row n_t times: (N_AP, K) -> (N_AP*N_t, K)."""
    return np.repeat(np.asarray(per_ap_matrix), n_t, axis=0)


def _per_antenna_variances(large_scale: LargeScaleState, n_t: int):
    alpha = expand_to_antennas(large_scale.alpha, n_t)
    err_var = expand_to_antennas(large_scale.beta - large_scale.alpha, n_t)
    if np.any(err_var < 0):
        raise ValueError("beta < alpha: invalid large-scale state")
    return alpha, err_var


def sample_cn(rng: np.random.Generator, variance: np.ndarray,
              shape: tuple) -> np.ndarray:
    """Circularly symmetric complex Gaussian entries with the given variances.

    Real and imaginary parts are independent N(0, variance/2) draws, taken
    interleaved from the stream and viewed as complex without copying.
    """
    z = rng.standard_normal(tuple(shape) + (2,)).view(np.complex128)[..., 0]
    z *= np.sqrt(np.asarray(variance) / 2.0)
    return z


def draw_channel(large_scale: LargeScaleState, config: SimulationConfig,
                 rng: np.random.Generator) -> ChannelDraw:
    """Draw one M x K channel realization split into estimate and error."""
    alpha, err_var = _per_antenna_variances(large_scale, config.N_t)
    g_hat = sample_cn(rng, alpha, alpha.shape)
    g_err = sample_cn(rng, err_var, err_var.shape)
    return ChannelDraw(g_hat=g_hat, g_err=g_err, g_true=g_hat + g_err)


def draw_channel_batch(large_scale: LargeScaleState, config: SimulationConfig,
                       rng: np.random.Generator, n_samples: int,
                       with_error: bool = True):
    """Draw n_samples realizations at once; returns (g_hat, g_err) stacked
    as (n_samples, M, K), with g_err None when with_error is False."""
    alpha, err_var = _per_antenna_variances(large_scale, config.N_t)
    shape = (n_samples,) + alpha.shape
    g_hat = sample_cn(rng, alpha, shape)
    g_err = sample_cn(rng, err_var, shape) if with_error else None
    return g_hat, g_err
