"""Topology-level Monte Carlo: runs a scheme over random scenario draws and
aggregates per-user SE into CDFs, percentiles and sum-SE statistics.

Every draw gets its own RNG stream derived from (seed, draw index), so runs
are reproducible regardless of how draws are scheduled, and all schemes at
the same layout and seed see identical topologies (paired comparisons).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .downlink import cbf_sinr, chi_from_delta, zfp_sinr
from .gram import estimate_delta
from .power import (cbf_full_power, cbf_maxmin_cellular, ul_full_power,
                    zfp_power_from_delta)
from .scenario import ConfigError, SimulationConfig, generate_topology, large_scale
from .uplink import mf_sinr_full_csi, mf_sinr_stats_only, zf_sinr

SCHEMES = ("DL-CBF", "DL-CBF-maxmin", "DL-ZFP",
           "UL-MF-fullCSI", "UL-MF-stats", "UL-ZF")


@dataclass(frozen=True)
class SchemeSpec:
    """A transceiver scheme plus the antenna layout it runs on."""

    scheme: str
    n_ap: int
    n_t: int

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; "
                              f"choose from {', '.join(SCHEMES)}")
        if self.scheme == "DL-CBF-maxmin" and self.n_ap != 1:
            raise ConfigError("DL-CBF-maxmin is defined for the cellular "
                              "layout only (N_AP = 1)")

    @property
    def label(self) -> str:
        return f"{self.scheme} N_AP={self.n_ap} N_t={self.n_t}"


@dataclass
class SEReport:
    """Pooled per-user SE samples of one scheme over all topology draws."""

    samples: np.ndarray      # (n_draws * K,) bits/s/Hz
    sum_se_mean: float       # mean over draws of the per-draw sum SE
    sum_se_stderr: float
    percentile_05: float
    n_draws: int
    scheme_label: str


@dataclass
class CdfSeries:
    """Empirical CDF: sorted values with cumulative probabilities (1/n .. 1)."""

    values: np.ndarray
    probs: np.ndarray


def cdf(samples) -> CdfSeries:
    """Empirical CDF of the samples as sorted order statistics."""
    values = np.sort(np.asarray(samples, dtype=float).ravel())
    if values.size == 0:
        raise ValueError("cannot build a CDF from no samples")
    probs = np.arange(1, values.size + 1) / values.size
    return CdfSeries(values=values, probs=probs)


def percentile(samples, p: float) -> float:
    """p-quantile (0 < p < 1) by linear interpolation of order statistics."""
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise ValueError("cannot take a percentile of no samples")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    return float(np.percentile(samples, 100.0 * p))


def _draw_se(config: SimulationConfig, scheme: str,
             seed_seq: np.random.SeedSequence) -> np.ndarray:
    """Per-user SE (K,) of one topology draw under the given scheme."""
    rng = np.random.default_rng(seed_seq)
    topology = generate_topology(config, rng)
    state = large_scale(topology, config, rng)
    if scheme == "UL-MF-fullCSI":
        sv = mf_sinr_full_csi(state, ul_full_power(config.K), config)
    elif scheme == "UL-MF-stats":
        sv = mf_sinr_stats_only(state, ul_full_power(config.K), config)
    elif scheme == "UL-ZF":
        # one sampling pass: row sums of delta are exactly the phi diagonal
        delta = estimate_delta(state, config, rng)
        chi = chi_from_delta(delta, state, config)
        sv = zf_sinr(state, ul_full_power(config.K), delta.sum(axis=1),
                     chi, config)
    elif scheme == "DL-CBF":
        sv = cbf_sinr(state, cbf_full_power(state), config)
    elif scheme == "DL-CBF-maxmin":
        eta, _ = cbf_maxmin_cellular(state, config)
        sv = cbf_sinr(state, eta, config)
    elif scheme == "DL-ZFP":
        # one sampling pass yields both the power rule and the chi matrix
        delta = estimate_delta(state, config, rng)
        eta = zfp_power_from_delta(delta)
        chi = chi_from_delta(delta, state, config)
        sv = zfp_sinr(eta, chi, config)
    else:
        raise ConfigError(f"unknown scheme {scheme!r}")
    return sv.se


def _draw_se_star(args) -> np.ndarray:
    return _draw_se(*args)


def run_experiment(config: SimulationConfig, scheme_spec: SchemeSpec) -> SEReport:
    """Run one scheme over n_topology_trials random topologies.

    The layout of scheme_spec overrides the config's antenna split (total M
    fixed). Infeasible combinations fail before any computation. Draws run
    in config.n_workers processes when n_workers > 1; results are folded in
    draw-index order, so the report does not depend on scheduling.
    """
    cfg = config.with_layout(scheme_spec.n_ap, scheme_spec.n_t)
    n_draws = cfg.n_topology_trials
    children = np.random.SeedSequence(cfg.seed).spawn(n_draws)
    tasks = [(cfg, scheme_spec.scheme, child) for child in children]
    if cfg.n_workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.n_workers) as pool:
            per_draw = list(pool.map(_draw_se_star, tasks, chunksize=8))
    else:
        per_draw = [_draw_se(*task) for task in tasks]

    se = np.vstack(per_draw)                  # (n_draws, K)
    sums = se.sum(axis=1)
    samples = se.ravel()
    stderr = float(np.std(sums, ddof=1) / np.sqrt(n_draws)) if n_draws > 1 else 0.0
    return SEReport(
        samples=samples,
        sum_se_mean=float(np.mean(sums)),
        sum_se_stderr=stderr,
        percentile_05=percentile(samples, 0.05),
        n_draws=n_draws,
        scheme_label=scheme_spec.label,
    )


@dataclass
class SweepPoint:
    k: int
    sum_se_mean: float
    sum_se_stderr: float


def sweep_users(config: SimulationConfig, k_list: Sequence[int],
                scheme_spec: SchemeSpec) -> list[SweepPoint]:
    """Mean sum SE versus the number of users, one experiment per K."""
    if not k_list:
        raise ConfigError("empty user-count list")
    for k in k_list:
        if not 1 <= k < config.M:
            raise ConfigError(f"K={k} must satisfy 1 <= K < M={config.M}")
    points = []
    for k in k_list:
        report = run_experiment(replace(config, K=int(k)), scheme_spec)
        points.append(SweepPoint(k=int(k), sum_se_mean=report.sum_se_mean,
                                 sum_se_stderr=report.sum_se_stderr))
    return points
