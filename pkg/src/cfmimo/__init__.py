"""Spectral-efficiency simulation for cellular and cell-free massive MIMO.

One model spans both architectures: M service antennas split over N_AP
access points with N_t antennas each, from a single co-located array
(N_AP = 1) to fully distributed single-antenna APs (N_AP = M). Closed-form
per-user SINR/SE is provided for matched-filter and zero-forcing uplink
detection and for conjugate-beamforming and zero-forcing downlink precoding,
together with link-level Monte Carlo oracles that validate every closed form
and a topology-level harness that reproduces CDF and sum-SE experiments.
"""

from .channel import ChannelDraw, draw_channel, draw_channel_batch, expand_to_antennas
from .downlink import (ChiMatrix, DownlinkPowerCBF, DownlinkPowerZFP, cbf_sinr,
                       estimate_chi, simulate_downlink, zfp_sinr,
                       zfp_sinr_cellular)
from .gram import GramSingularError, estimate_delta
from .montecarlo import (CdfSeries, SchemeSpec, SEReport, SweepPoint, cdf,
                         percentile, run_experiment, sweep_users)
from .power import (cbf_full_power, cbf_maxmin_cellular, ul_full_power,
                    zfp_subopt_power)
from .scenario import (ConfigError, LargeScaleState, SimulationConfig, Topology,
                       generate_topology, l0_db, large_scale, load_config,
                       noise_power_watts, path_loss_db)
from .sinr import SinrVector
from .uplink import (MfTermPowers, UplinkPower, estimate_phi, mf_sinr_full_csi,
                     mf_sinr_stats_only, mf_term_powers_closed_form,
                     mf_variance_oracle, simulate_uplink_zf, zf_sinr)

__version__ = "0.1.0"

__all__ = [
    "ChannelDraw", "ChiMatrix", "CdfSeries", "ConfigError", "DownlinkPowerCBF",
    "DownlinkPowerZFP", "GramSingularError", "LargeScaleState", "MfTermPowers",
    "SEReport", "SchemeSpec", "SimulationConfig", "SinrVector", "SweepPoint",
    "Topology", "UplinkPower", "cbf_full_power", "cbf_maxmin_cellular",
    "cbf_sinr", "cdf", "draw_channel", "draw_channel_batch", "estimate_chi",
    "estimate_delta", "estimate_phi", "expand_to_antennas", "generate_topology",
    "l0_db", "large_scale", "load_config", "mf_sinr_full_csi",
    "mf_sinr_stats_only", "mf_term_powers_closed_form", "mf_variance_oracle",
    "noise_power_watts", "path_loss_db", "percentile", "run_experiment",
    "simulate_downlink", "simulate_uplink_zf", "sweep_users", "ul_full_power",
    "zf_sinr", "zfp_sinr", "zfp_sinr_cellular", "zfp_subopt_power",
]
