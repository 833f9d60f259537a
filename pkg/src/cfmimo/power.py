"""Power-control rules: uplink full power, downlink full-power conjugate
beamforming, the common-coefficient zero-forcing rule, and the closed-form
max-min allocation for a single co-located array."""

from __future__ import annotations

import warnings
from typing import Optional, Tuple

import numpy as np

from .downlink import DownlinkPowerCBF, DownlinkPowerZFP
from .gram import estimate_delta
from .scenario import LargeScaleState, SimulationConfig, noise_power_watts
from .uplink import UplinkPower


def ul_full_power(k: int) -> UplinkPower:
    """Every user transmits at full power; the distributed default."""
    if k < 1:
        raise ValueError("need at least one user")
    return UplinkPower(eta=np.ones(k))


def cbf_full_power(large_scale: LargeScaleState) -> DownlinkPowerCBF:
    """Full-power conjugate beamforming: each AP radiates its entire budget.

    The common per-AP coefficient 1 / sum_k alpha[q, k] meets the per-antenna
    power constraint with equality. An AP with no estimated energy toward any
    user transmits nothing (coefficients 0) and a warning is emitted.
    """
    totals = np.sum(large_scale.alpha, axis=1)  # (N_AP,)
    dead = totals <= 0
    if np.any(dead):
        warnings.warn(f"{int(np.sum(dead))} AP(s) have zero estimate energy "
                      "and are switched off", RuntimeWarning, stacklevel=2)
    with np.errstate(divide="ignore"):
        coeff = np.where(dead, 0.0, 1.0 / np.where(dead, 1.0, totals))
    eta = np.repeat(coeff[:, None], large_scale.n_users, axis=1)
    return DownlinkPowerCBF(eta=eta)


def zfp_power_from_delta(delta: np.ndarray) -> DownlinkPowerZFP:
    """Common ZFP coefficient from a sampled per-antenna power profile:
    the reciprocal of the busiest antenna's total, so every antenna's
    expected transmit power stays within budget."""
    k = delta.shape[0]
    busiest = float(np.max(np.sum(delta, axis=0)))
    if busiest <= 0:
        raise ValueError("delta profile has no positive antenna load")
    return DownlinkPowerZFP(eta=np.full(k, 1.0 / busiest))


def zfp_subopt_power(large_scale: LargeScaleState, config: SimulationConfig,
                     rng: np.random.Generator,
                     n_samples: Optional[int] = None) -> DownlinkPowerZFP:
    """Low-complexity common power coefficient for zero-forcing precoding."""
    delta = estimate_delta(large_scale, config, rng, n_samples)
    return zfp_power_from_delta(delta)


def cbf_maxmin_cellular(large_scale: LargeScaleState,
                        config: SimulationConfig
                        ) -> Tuple[DownlinkPowerCBF, float]:
    """Closed-form max-min power control for single-array conjugate beamforming.

    At the optimum the array radiates at full power and all users sit at the
    common SINR t; the per-user coefficients weight each user by its noise-
    plus-leakage to estimate-quality ratio. Returns (coefficients, t).
    """
    if large_scale.n_ap != 1:
        raise ValueError("max-min closed form requires a single AP")
    beta = large_scale.beta[0]
    alpha = large_scale.alpha[0]
    if np.any(alpha <= 0):
        raise ValueError("max-min power control is infeasible: some user has "
                         "zero estimate variance and cannot be equalized")
    m, p_d = config.M, config.p_d
    sigma2 = noise_power_watts(config)
    cost = (sigma2 + p_d * m * beta) / (p_d * m**2 * alpha)  # (K,)
    t = 1.0 / float(np.sum(cost))
    eta = t * cost / alpha
    return DownlinkPowerCBF(eta=eta[None, :]), t
