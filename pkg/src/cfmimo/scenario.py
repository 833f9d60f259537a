"""Network scenarios: geometry, COST-Hata path loss, shadowing and noise.

A scenario draw fixes everything that changes on the slow timescale: AP and
user positions, per-link large-scale gains beta, and the variance alpha of
the MMSE channel estimate each link admits at the configured uplink power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np
import yaml


class ConfigError(ValueError):
    """Invalid configuration value or malformed config file."""


@dataclass
class SimulationConfig:
    """All physical and experiment parameters of one simulation campaign.

    Antenna layout: M service antennas split over N_AP access points with
    N_t antennas each (M = N_AP * N_t). N_AP = 1 is a single co-located
    base station; N_AP = M is the fully distributed single-antenna layout.
    """

    M: int = 256                 # total service antennas
    N_AP: int = 256              # access points
    N_t: int = 1                 # antennas per AP
    K: int = 16                  # single-antenna users
    area_side: float = 1000.0    # side of the square coverage area [m]
    p_u: float = 0.1             # UE transmit power [W]
    p_d: float = 0.2             # per-antenna downlink power [W]
    f_c_mhz: float = 1900.0      # carrier frequency [MHz]
    h_ap: float = 15.0           # AP antenna height [m]
    h_ue: float = 1.65           # UE height [m]
    sigma_sd_db: float = 8.0     # shadowing standard deviation [dB]
    d0_km: float = 0.01          # inner three-slope breakpoint [km]
    d1_km: float = 0.05          # outer three-slope breakpoint [km]
    noise_density_dbm_hz: float = -174.0
    noise_figure_db: float = 9.0
    bandwidth_hz: float = 5e6
    n_topology_trials: int = 200
    n_channel_samples: int = 1000  # inner Monte Carlo draws per topology
    seed: int = 0
    n_workers: int = 1           # >1 runs topology draws in worker processes

    def __post_init__(self):
        if self.M != self.N_AP * self.N_t:
            raise ConfigError(f"M={self.M} must equal N_AP*N_t={self.N_AP * self.N_t}")
        if not 1 <= self.N_AP <= self.M:
            raise ConfigError(f"N_AP={self.N_AP} must lie in [1, M={self.M}]")
        if not 1 <= self.K < self.M:
            raise ConfigError(f"K={self.K} must satisfy 1 <= K < M={self.M}")
        for name in ("area_side", "p_u", "p_d", "f_c_mhz", "h_ap", "h_ue",
                     "bandwidth_hz"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be strictly positive")
        if self.sigma_sd_db < 0:
            raise ConfigError("sigma_sd_db must be nonnegative")
        if not 0 < self.d0_km < self.d1_km:
            raise ConfigError("breakpoints must satisfy 0 < d0_km < d1_km")
        if self.n_topology_trials < 1 or self.n_channel_samples < 1:
            raise ConfigError("trial and sample counts must be >= 1")
        if self.n_workers < 1:
            raise ConfigError("n_workers must be >= 1")

    def with_layout(self, n_ap: int, n_t: int) -> "SimulationConfig":
        """Same campaign with the M antennas re-blocked into n_ap APs."""
        return replace(self, N_AP=n_ap, N_t=n_t)


def _flatten(mapping: dict, prefix: str = "") -> dict:
    flat = {}
    for key, value in mapping.items():
        if isinstance(value, dict):
            flat.update(_flatten(value, f"{prefix}{key}."))
        else:
            flat[key] = value
    return flat


def config_from_mapping(mapping: dict) -> SimulationConfig:
    """Build a config from a (possibly nested) key-value mapping.

    Nested groups are flattened by leaf key, so physical parameters may be
    organised into sections freely. Unknown leaf keys are rejected.
    """
    known = {f.name for f in fields(SimulationConfig)}
    flat = _flatten(mapping or {})
    unknown = sorted(set(flat) - known)
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
    try:
        return SimulationConfig(**flat)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str) -> SimulationConfig:
    """Load a SimulationConfig from a YAML file; absent keys keep defaults."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_mapping(raw)


@dataclass
class Topology:
    """Planar AP and UE coordinates (meters) for one scenario draw."""

    ap_positions: np.ndarray  # (N_AP, 2)
    ue_positions: np.ndarray  # (K, 2)

    def __post_init__(self):
        self.ap_positions = np.atleast_2d(np.asarray(self.ap_positions, dtype=float))
        self.ue_positions = np.atleast_2d(np.asarray(self.ue_positions, dtype=float))


@dataclass
class LargeScaleState:
    """Per-AP-per-user large-scale gains: beta and MMSE estimate variance alpha.

    Both are (N_AP, K) linear power gains. Every antenna of one AP shares its
    AP's row, so per-AP storage is lossless; expand to per-antenna form only
    where a formula needs it.
    """

    beta: np.ndarray   # (N_AP, K)
    alpha: np.ndarray  # (N_AP, K)

    def __post_init__(self):
        self.beta = np.atleast_2d(np.asarray(self.beta, dtype=float))
        self.alpha = np.atleast_2d(np.asarray(self.alpha, dtype=float))
        if self.beta.shape != self.alpha.shape:
            raise ValueError("beta and alpha must have identical shapes")
        if np.any(self.beta < 0) or np.any(self.alpha < 0):
            raise ValueError("large-scale gains must be nonnegative")
        if np.any(self.alpha > self.beta):
            raise ValueError("estimate variance alpha cannot exceed beta")

    @property
    def n_ap(self) -> int:
        return self.beta.shape[0]

    @property
    def n_users(self) -> int:
        return self.beta.shape[1]


def l0_db(f_c_mhz: float, h_ap: float, h_ue: float) -> float:
    """COST-Hata fixed-loss term [dB] for carrier f_c (MHz) and antenna heights (m)."""
    if f_c_mhz <= 0 or h_ap <= 0 or h_ue < 0:
        raise ValueError("f_c_mhz and h_ap must be positive, h_ue nonnegative")
    lf = math.log10(f_c_mhz)
    return (46.3 + 33.9 * lf - 13.82 * math.log10(h_ap)
            - (1.1 * lf - 0.7) * h_ue + 1.56 * lf - 0.8)


def path_loss_db(d_km, config: SimulationConfig):
    """Three-slope COST-Hata path gain [dB] (negative of the loss).

    35 dB/decade beyond d1, 20 dB/decade between d0 and d1 plus a fixed
    d1-dependent offset, and constant below d0. Continuous at both
    breakpoints and non-increasing in distance. Accepts scalars or arrays.
    """
    d = np.asarray(d_km, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be nonnegative")
    l0 = l0_db(config.f_c_mhz, config.h_ap, config.h_ue)
    d0, d1 = config.d0_km, config.d1_km
    d_mid = np.clip(d, d0, d1)  # keeps log10 finite on the unused branches
    d_far = np.maximum(d, d1)
    gain = np.where(
        d > d1,
        -l0 - 35.0 * np.log10(d_far),
        -l0 - 10.0 * np.log10(d1**1.5 * d_mid**2),
    )
    if gain.ndim == 0:
        return float(gain)
    return gain


def noise_power_watts(config: SimulationConfig) -> float:
    """Receiver noise power [W] over the signal bandwidth, noise figure included."""
    dbm = (config.noise_density_dbm_hz
           + 10.0 * math.log10(config.bandwidth_hz)
           + config.noise_figure_db)
    return 10.0 ** ((dbm - 30.0) / 10.0)


def generate_topology(config: SimulationConfig, rng: np.random.Generator) -> Topology:
    """Draw one topology: UEs uniform over the square, APs uniform too.

    A single AP (the cellular base station) sits at the square's center
    instead of being drawn at random.
    """
    side = config.area_side
    ue = rng.uniform(0.0, side, size=(config.K, 2))
    if config.N_AP == 1:
        ap = np.array([[side / 2.0, side / 2.0]])
    else:
        ap = rng.uniform(0.0, side, size=(config.N_AP, 2))
    return Topology(ap_positions=ap, ue_positions=ue)


def large_scale(topology: Topology, config: SimulationConfig,
                rng: np.random.Generator) -> LargeScaleState:
    """Compute beta (path loss + one shadowing draw per AP-UE pair) and alpha.

    beta = 10^((L + X)/10) with X ~ N(0, sigma_sd^2); alpha is the MMSE
    estimate variance p_u*beta^2 / (p_u*beta + sigma_n^2) of each link.
    """
    diff = topology.ap_positions[:, None, :] - topology.ue_positions[None, :, :]
    d_km = np.sqrt(np.sum(diff**2, axis=2)) / 1000.0
    loss = path_loss_db(d_km, config)
    shadow = rng.normal(0.0, config.sigma_sd_db, size=d_km.shape)
    beta = 10.0 ** ((loss + shadow) / 10.0)
    sigma2 = noise_power_watts(config)
    alpha = config.p_u * beta**2 / (config.p_u * beta + sigma2)
    return LargeScaleState(beta=beta, alpha=alpha)
