"""Downlink per-user SINR/SE: conjugate beamforming and zero-forcing precoding.

Users decode with statistical channel knowledge only (there are no downlink
pilots), so every bound here measures the desired signal through the mean
effective channel and counts its fluctuation as interference. The
zero-forcing precoder needs the chi matrix: per-user error-covariance
projections through the inverse estimate Gram, estimated by sampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import draw_channel_batch, expand_to_antennas
from .gram import estimate_delta, well_conditioned_chunks
from .scenario import LargeScaleState, SimulationConfig, noise_power_watts
from .sinr import SinrVector, safe_ratio


@dataclass
class DownlinkPowerCBF:
    """Per-AP per-user conjugate-beamforming power coefficients.

    Feasibility is the per-antenna constraint sum_k eta[q, k] * alpha[q, k] <= 1
    for every AP q of the large-scale state the coefficients were built for.
    """

    eta: np.ndarray  # (N_AP, K)

    def __post_init__(self):
        self.eta = np.atleast_2d(np.asarray(self.eta, dtype=float))
        if np.any(self.eta < 0):
            raise ValueError("power coefficients must be nonnegative")


@dataclass
class DownlinkPowerZFP:
    """Per-user zero-forcing precoding power coefficients (common across antennas)."""

    eta: np.ndarray  # (K,)

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=float)
        if np.any(self.eta < 0):
            raise ValueError("power coefficients must be nonnegative")


@dataclass
class ChiMatrix:
    """chi[i, k]: interference weight of user i's power on user k under ZFP."""

    chi: np.ndarray  # (K, K)

    def __post_init__(self):
        self.chi = np.atleast_2d(np.asarray(self.chi, dtype=float))
        if np.any(self.chi < 0):
            raise ValueError("chi entries must be nonnegative")


def _eta_matrix(eta, n_ap: int, k: int) -> np.ndarray:
    mat = np.atleast_2d(np.asarray(getattr(eta, "eta", eta), dtype=float))
    if mat.shape != (n_ap, k):
        raise ValueError(f"expected ({n_ap}, {k}) power matrix, got {mat.shape}")
    return mat


def _eta_vector(eta, k: int) -> np.ndarray:
    vec = np.asarray(getattr(eta, "eta", eta), dtype=float)
    if vec.shape != (k,):
        raise ValueError(f"expected {k} power coefficients, got shape {vec.shape}")
    return vec


def cbf_sinr(large_scale: LargeScaleState, eta_cbf,
             config: SimulationConfig) -> SinrVector:
    """Effective SINR under conjugate beamforming with per-AP power coefficients.

    The coherent gain adds amplitudes sqrt(eta) * alpha across APs; both the
    beamforming-gain fluctuation and inter-user interference land on each
    user through its own beta, weighted by every AP's total radiated load.
    """
    alpha, beta = large_scale.alpha, large_scale.beta
    eta = _eta_matrix(eta_cbf, large_scale.n_ap, large_scale.n_users)
    p_d, nt = config.p_d, config.N_t
    sigma2 = noise_power_watts(config)
    gain = np.sum(np.sqrt(eta) * alpha, axis=0)          # (K,)
    ap_load = np.sum(eta * alpha, axis=1)                # (N_AP,)
    num = p_d * nt**2 * gain**2
    den = sigma2 + p_d * nt * (beta.T @ ap_load)
    return SinrVector.from_gamma(safe_ratio(num, den))


def chi_from_delta(delta: np.ndarray, large_scale: LargeScaleState,
                   config: SimulationConfig) -> ChiMatrix:
    """Contract a sampled per-antenna precoder power profile (K x M) with the
    per-antenna error variances to obtain chi."""
    err = expand_to_antennas(large_scale.beta - large_scale.alpha, config.N_t)
    return ChiMatrix(chi=np.maximum(delta @ err, 0.0))


def estimate_chi(large_scale: LargeScaleState, config: SimulationConfig,
                 rng: np.random.Generator,
                 n_samples: Optional[int] = None) -> ChiMatrix:
    """Monte Carlo estimate of the ZFP error-projection matrix chi (K x K).

    chi[i, k] is the i-th diagonal entry of the expectation of
    (C C^H)^-1 C E_k C^H (C C^H)^-1, with C the K x M estimate matrix and
    E_k the diagonal per-antenna error covariance of user k. Since E_k is
    deterministic, this is the sampled per-antenna precoder power profile
    contracted with the error variances.
    """
    delta = estimate_delta(large_scale, config, rng, n_samples)  # (K, M)
    return chi_from_delta(delta, large_scale, config)


def zfp_sinr(eta_zfp, chi, config: SimulationConfig) -> SinrVector:
    """Effective SINR under zero-forcing precoding given the chi matrix."""
    chi_mat = np.atleast_2d(np.asarray(getattr(chi, "chi", chi), dtype=float))
    eta = _eta_vector(eta_zfp, chi_mat.shape[0])
    p_d = config.p_d
    den = noise_power_watts(config) + p_d * (eta @ chi_mat)
    return SinrVector.from_gamma(safe_ratio(p_d * eta, den))


def zfp_sinr_cellular(eta_zfp, large_scale: LargeScaleState, phi: np.ndarray,
                      config: SimulationConfig) -> SinrVector:
    """Zero-forcing precoding SINR specialised to a single co-located array.

    With one AP the error covariance of user k is a scaled identity, so chi
    factorizes into (beta_k - alpha_k) * phi_i and no chi sampling is needed.
    """
    if large_scale.n_ap != 1:
        raise ValueError("cellular ZFP formula requires a single AP")
    eta = _eta_vector(eta_zfp, large_scale.n_users)
    phi = np.asarray(phi, dtype=float)
    err = (large_scale.beta - large_scale.alpha)[0]      # (K,)
    p_d = config.p_d
    den = noise_power_watts(config) + p_d * err * float(eta @ phi)
    return SinrVector.from_gamma(safe_ratio(p_d * eta, den))


def cbf_precoder(g_hat: np.ndarray, eta_per_antenna: np.ndarray) -> np.ndarray:
    """Conjugate-beamforming precoding matrix sqrt(eta) * conj(estimate)."""
    return np.sqrt(eta_per_antenna) * g_hat.conj()


def zfp_precoder(g_hat: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Zero-forcing precoding matrix: estimate pseudo-inverse columns scaled
    by sqrt(eta), so the intended effective gain of user k is sqrt(eta_k)."""
    c_mat = g_hat.T
    gram = c_mat @ c_mat.conj().T
    return np.linalg.solve(gram, c_mat).conj().T * np.sqrt(eta)


def simulate_downlink(large_scale: LargeScaleState, scheme: str, power,
                      config: SimulationConfig, rng: np.random.Generator,
                      n_samples: Optional[int] = None) -> SinrVector:
    """Empirical downlink SINR for "cbf" or "zfp" from precoded channel draws.

    Accumulates the first and second moments of the effective coefficients
    (true channel)^T (precoder column) across draws; the desired power is the
    squared mean coefficient (the only part a pilot-free user can decode
    against) and everything else, plus noise, is the denominator.
    """
    k = large_scale.n_users
    n = n_samples or config.n_channel_samples
    p_d = config.p_d
    sigma2 = noise_power_watts(config)

    diag_sum = np.zeros(k, dtype=complex)
    abs2_sum = np.zeros((k, k))
    scheme = scheme.lower()
    if scheme == "cbf":
        eta_ant = expand_to_antennas(
            _eta_matrix(power, large_scale.n_ap, k), config.N_t)
        sqrt_eta_ant = np.sqrt(eta_ant)
        remaining = n
        chunk = max(1, min(n, (1 << 20) // max(1, config.M * k)))
        while remaining > 0:
            nn = min(chunk, remaining)
            g_hat, g_err = draw_channel_batch(large_scale, config, rng, nn)
            b = sqrt_eta_ant * g_hat.conj()
            coeff = np.einsum("nmk,nmi->nki", g_hat + g_err, b)
            diag_sum += np.einsum("nkk->k", coeff)
            abs2_sum += np.sum(coeff.real**2 + coeff.imag**2, axis=0)
            remaining -= nn
    elif scheme == "zfp":
        sqrt_eta = np.sqrt(_eta_vector(power, k))
        for ch in well_conditioned_chunks(large_scale, config, rng, n,
                                          with_error=True):
            pinv_cols = np.linalg.solve(ch.gram, ch.c_mat).conj().transpose(0, 2, 1)
            b = pinv_cols * sqrt_eta
            coeff = np.einsum("nmk,nmi->nki", ch.g_hat + ch.g_err, b)
            diag_sum += np.einsum("nkk->k", coeff)
            abs2_sum += np.sum(coeff.real**2 + coeff.imag**2, axis=0)
    else:
        raise ValueError(f"unknown downlink scheme {scheme!r}")

    mean_gain = diag_sum / n
    desired = np.abs(mean_gain) ** 2
    total_abs2 = abs2_sum.sum(axis=1) / n
    residual = np.maximum(total_abs2 - desired, 0.0)
    return SinrVector.from_gamma(
        safe_ratio(p_d * desired, sigma2 + p_d * residual))
