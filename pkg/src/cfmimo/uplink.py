"""Uplink per-user SINR/SE: matched filtering and zero-forcing detection.

Matched filtering comes in two flavors depending on what the receiver knows:
the instantaneous channel estimates (full CSI) or only their variances
(statistics-only), which adds a channel-uncertainty penalty to the
interference. Zero forcing needs full CSI and the phi expectation of the
inverse estimate Gram. Each closed form has a Monte Carlo oracle here that
simulates the corresponding receive chain term by term.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import draw_channel_batch, sample_cn
from .gram import estimate_inverse_gram_diag, well_conditioned_chunks
from .scenario import LargeScaleState, SimulationConfig, noise_power_watts
from .sinr import SinrVector, safe_ratio


@dataclass
class UplinkPower:
    """Per-user uplink power coefficients, each in [0, 1]."""

    eta: np.ndarray  # (K,)

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=float)
        if np.any(self.eta < 0) or np.any(self.eta > 1):
            raise ValueError("uplink power coefficients must lie in [0, 1]")


def _eta_vector(eta, k: int) -> np.ndarray:
    vec = np.asarray(getattr(eta, "eta", eta), dtype=float)
    if vec.shape != (k,):
        raise ValueError(f"expected {k} power coefficients, got shape {vec.shape}")
    return vec


def _mf_denominator_terms(large_scale: LargeScaleState, eta: np.ndarray,
                          config: SimulationConfig):
    alpha, beta = large_scale.alpha, large_scale.beta
    p_u, nt = config.p_u, config.N_t
    sigma2 = noise_power_watts(config)
    a_sum = alpha.sum(axis=0)                    # (K,)
    cross = (alpha.T @ beta) @ eta               # (K,): sum_i eta_i sum_q a_qk b_qi
    self_sq = np.sum(alpha**2, axis=0)           # (K,)
    t_interf = p_u * nt * cross
    t_noise = sigma2 * nt * a_sum
    t_self = p_u * eta * nt * self_sq
    num = p_u * eta * nt**2 * a_sum**2
    return num, t_interf, t_noise, t_self


def mf_sinr_full_csi(large_scale: LargeScaleState, eta,
                     config: SimulationConfig) -> SinrVector:
    """Effective SINR of matched filtering when the estimates are known.

    Knowing the realized estimate removes its own fluctuation from the
    interference, so the self term is subtracted from the denominator.
    Users with zero estimate variance everywhere get SINR 0.
    """
    eta = _eta_vector(eta, large_scale.n_users)
    num, t_interf, t_noise, t_self = _mf_denominator_terms(large_scale, eta, config)
    # beta >= alpha makes the true denominator nonnegative; clamp float dust
    den = np.maximum((t_interf - t_self) + t_noise, 0.0)
    return SinrVector.from_gamma(safe_ratio(num, den))


def mf_sinr_stats_only(large_scale: LargeScaleState, eta,
                       config: SimulationConfig) -> SinrVector:
    """Effective SINR of matched filtering from channel statistics alone.

    The receiver scales by the mean estimate energy, so the fluctuation of
    the realized energy re-enters the interference: the denominator keeps
    the self term that full CSI removes, and the SINR can only be lower.
    """
    eta = _eta_vector(eta, large_scale.n_users)
    num, t_interf, t_noise, _ = _mf_denominator_terms(large_scale, eta, config)
    return SinrVector.from_gamma(safe_ratio(num, t_interf + t_noise))


def estimate_phi(large_scale: LargeScaleState, config: SimulationConfig,
                 rng: np.random.Generator,
                 n_samples: Optional[int] = None) -> np.ndarray:
    """Sample mean of the diagonal of the inverse estimate Gram, shape (K,)."""
    return estimate_inverse_gram_diag(large_scale, config, rng, n_samples)


def zf_sinr(large_scale: LargeScaleState, eta, phi: np.ndarray, chi,
            config: SimulationConfig) -> SinrVector:
    """Effective SINR of zero-forcing detection given the sampled inverse-Gram
    statistics phi (detector row energies) and chi (error projections).

    After the pseudo-inverse cancels the estimated channels exactly, user k
    is left with each interferer's estimation error filtered through its own
    detector row -- chi[k, i] -- plus noise scaled by the row energy phi_k:

        gamma_k = p_u eta_k / (p_u sum_i eta_i chi[k, i] + sigma_n^2 phi_k)

    For a single co-located array chi[k, i] factorizes into
    (beta_i - alpha_i) phi_k, recovering the phi-only cellular form.
    """
    eta = _eta_vector(eta, large_scale.n_users)
    phi = np.asarray(phi, dtype=float)
    if np.any(phi <= 0):
        raise ValueError("phi must be strictly positive")
    chi_mat = np.atleast_2d(np.asarray(getattr(chi, "chi", chi), dtype=float))
    den = config.p_u * (chi_mat @ eta) + noise_power_watts(config) * phi
    return SinrVector.from_gamma(safe_ratio(config.p_u * eta, den))


@dataclass
class MfTermPowers:
    """Monte Carlo mean powers of the matched-filter receive terms per user.

    s0 is the desired-signal power through the mean estimate energy (the
    effective-SINR bound credits only the mean gain; the energy fluctuation
    is the statistics-only penalty, available as norm2_var). i1/i2/i3 are
    the estimation-error, inter-user and noise term powers. *_se are
    standard errors; s0_se propagates the mean-energy error quadratically.
    """

    s0: np.ndarray
    i1: np.ndarray
    i2: np.ndarray
    i3: np.ndarray
    s0_se: np.ndarray
    i1_se: np.ndarray
    i2_se: np.ndarray
    i3_se: np.ndarray
    norm2_mean: np.ndarray
    norm2_var: np.ndarray
    n_samples: int

    def sinr_full_csi(self) -> np.ndarray:
        """Empirical counterpart of the full-CSI matched-filter bound."""
        return self.s0 / (self.i1 + self.i2 + self.i3)

    def sinr_stats_only(self, p_u: float, eta: np.ndarray) -> np.ndarray:
        """Empirical counterpart of the statistics-only bound: the estimate
        energy fluctuation joins the interference."""
        uncertainty = p_u * np.asarray(eta) * self.norm2_var
        return self.s0 / (uncertainty + self.i1 + self.i2 + self.i3)


def mf_term_powers_closed_form(large_scale: LargeScaleState, eta,
                               config: SimulationConfig):
    """Closed-form counterparts (s0, i1, i2, i3) of the oracle term powers."""
    eta = _eta_vector(eta, large_scale.n_users)
    alpha, beta = large_scale.alpha, large_scale.beta
    p_u, nt = config.p_u, config.N_t
    sigma2 = noise_power_watts(config)
    a_sum = alpha.sum(axis=0)
    s0 = p_u * eta * nt**2 * a_sum**2
    i1 = p_u * eta * nt * np.sum((beta - alpha) * alpha, axis=0)
    full = (alpha.T @ beta) @ eta                     # includes i = k
    own = eta * np.einsum("qk,qk->k", alpha, beta)
    i2 = p_u * nt * (full - own)
    i3 = sigma2 * nt * a_sum
    return s0, i1, i2, i3


def mf_variance_oracle(large_scale: LargeScaleState, eta,
                       config: SimulationConfig, rng: np.random.Generator,
                       n_samples: Optional[int] = None) -> MfTermPowers:
    """Simulate the matched-filter receive chain and measure each term's power.

    Draws estimates, errors, symbols and noise, decomposes the filter output
    into desired signal, estimation-error leakage, inter-user interference
    and filtered noise, and returns their sample mean powers with standard
    errors for direct comparison against the closed forms.
    """
    k = large_scale.n_users
    eta = _eta_vector(eta, k)
    n = n_samples or config.n_channel_samples
    p_u = config.p_u
    sigma2 = noise_power_watts(config)
    sqrt_eta = np.sqrt(eta)

    sums = np.zeros((3, k))
    sq_sums = np.zeros((3, k))
    norm2_sum = np.zeros(k)
    norm2_sq_sum = np.zeros(k)

    chunk = max(1, min(n, (1 << 20) // max(1, config.M * k)))
    remaining = n
    while remaining > 0:
        nn = min(chunk, remaining)
        g_hat, g_err = draw_channel_batch(large_scale, config, rng, nn)
        x = sample_cn(rng, 1.0, (nn, k))
        noise = sample_cn(rng, sigma2, (nn, config.M))

        norm2 = np.sum(g_hat.real**2 + g_hat.imag**2, axis=1)      # (nn, K)
        cross = np.einsum("nmk,nmk->nk", g_hat.conj(), g_err)
        coup = np.einsum("nmk,nmi->nki", g_hat.conj(), g_hat + g_err)
        mixed = np.einsum("nki,ni->nk", coup, sqrt_eta * x)
        own = np.einsum("nkk->nk", coup) * sqrt_eta * x

        i1 = np.sqrt(p_u) * sqrt_eta * cross * x
        i2 = np.sqrt(p_u) * (mixed - own)
        i3 = np.einsum("nmk,nm->nk", g_hat.conj(), noise)

        for row, term in enumerate((i1, i2, i3)):
            power = term.real**2 + term.imag**2
            sums[row] += power.sum(axis=0)
            sq_sums[row] += (power**2).sum(axis=0)
        norm2_sum += norm2.sum(axis=0)
        norm2_sq_sum += (norm2**2).sum(axis=0)
        remaining -= nn

    means = sums / n
    variances = np.maximum(sq_sums / n - means**2, 0.0)
    ses = np.sqrt(variances / n)
    norm2_mean = norm2_sum / n
    norm2_var = np.maximum(norm2_sq_sum / n - norm2_mean**2, 0.0)
    norm2_se = np.sqrt(norm2_var / n)
    s0 = p_u * eta * norm2_mean**2
    s0_se = p_u * eta * 2.0 * norm2_mean * norm2_se
    return MfTermPowers(
        s0=s0, i1=means[0], i2=means[1], i3=means[2],
        s0_se=s0_se, i1_se=ses[0], i2_se=ses[1], i3_se=ses[2],
        norm2_mean=norm2_mean, norm2_var=norm2_var, n_samples=n)


def zf_detector(g_hat: np.ndarray) -> np.ndarray:
    """Zero-forcing detector rows (K x M): pseudo-inverse of the estimates."""
    gram = g_hat.conj().T @ g_hat
    return np.linalg.solve(gram, g_hat.conj().T)


def simulate_uplink_zf(large_scale: LargeScaleState, eta,
                       config: SimulationConfig, rng: np.random.Generator,
                       n_samples: Optional[int] = None) -> SinrVector:
    """Empirical zero-forcing SINR from simulated receive symbols.

    Per draw, the pseudo-inverse detector built from the estimates is applied
    to a received vector with fresh symbols and noise; the part of the output
    beyond sqrt(p_u eta_k) x_k counts as error-plus-noise power.
    """
    k = large_scale.n_users
    eta = _eta_vector(eta, k)
    n = n_samples or config.n_channel_samples
    p_u = config.p_u
    sigma2 = noise_power_watts(config)
    amp = np.sqrt(p_u * eta)

    signal_sum = np.zeros(k)
    error_sum = np.zeros(k)
    for ch in well_conditioned_chunks(large_scale, config, rng, n,
                                      with_error=True):
        nn = ch.g_hat.shape[0]
        detector = np.linalg.solve(ch.gram, ch.c_mat).conj()  # (nn, K, M)
        x = sample_cn(rng, 1.0, (nn, k))
        noise = sample_cn(rng, sigma2, (nn, config.M))
        g_true = ch.g_hat + ch.g_err
        received = np.sqrt(p_u) * np.einsum(
            "nmk,nk->nm", g_true, np.sqrt(eta) * x) + noise
        y = np.einsum("nkm,nm->nk", detector, received)
        desired = amp * x
        err = y - desired
        signal_sum += np.sum(desired.real**2 + desired.imag**2, axis=0)
        error_sum += np.sum(err.real**2 + err.imag**2, axis=0)
    return SinrVector.from_gamma(safe_ratio(signal_sum / n, error_sum / n))
