"""Monte Carlo statistics of the inverse estimated-channel Gram matrix.

The zero-forcing closed forms depend on expectations that have no general
closed form: the diagonal of E[(Ghat^H Ghat)^-1] (phi), the per-user error
projections (chi) and the per-antenna precoder powers (delta). All three are
sample means over channel-estimate draws of quantities derived from
A = (C C^H)^-1 C, where C is the K x M matrix whose row k is user k's
estimate across all antennas:

    phi_k   = E[ (C C^H)^-1 ]_kk  = E[ sum_m |A_km|^2 ]
    delta_km = E[ |A_km|^2 ]

Draws whose Gram matrix is numerically singular (reciprocal condition number
below RCOND_MIN) are redrawn; more than REDRAW_BUDGET of the requested
samples redrawn aborts the estimate, which signals M too close to K.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .channel import draw_channel_batch
from .scenario import LargeScaleState, SimulationConfig

RCOND_MIN = 1e-12
REDRAW_BUDGET = 0.01   # fraction of n_samples
_CHUNK_ELEMS = 1 << 21  # target complex entries per chunk


class GramSingularError(RuntimeError):
    """Too many singular Gram draws: the estimate is unreliable."""


@dataclass
class ChannelChunk:
    """A chunk of well-conditioned draws with the per-draw Gram pre-computed."""

    g_hat: np.ndarray          # (n, M, K)
    g_err: Optional[np.ndarray]
    c_mat: np.ndarray          # (n, K, M), row k = user k across antennas
    gram: np.ndarray           # (n, K, K) = C C^H


def _chunk_size(m: int, k: int, n_samples: int) -> int:
    return max(1, min(n_samples, _CHUNK_ELEMS // max(1, m * k)))


def _singular_mask(gram: np.ndarray) -> np.ndarray:
    # Hermitian PSD, so the 2-norm condition number is the eigenvalue ratio.
    ev = np.linalg.eigvalsh(gram)
    lo, hi = ev[..., 0], ev[..., -1]
    return (hi <= 0.0) | (lo <= RCOND_MIN * hi)


def well_conditioned_chunks(
    large_scale: LargeScaleState,
    config: SimulationConfig,
    rng: np.random.Generator,
    n_samples: int,
    with_error: bool = False,
) -> Iterator[ChannelChunk]:
    """Yield channel-draw chunks totalling n_samples, redrawing singular Grams."""
    budget = REDRAW_BUDGET * n_samples
    redrawn = 0
    remaining = n_samples
    chunk = _chunk_size(config.M, config.K, n_samples)
    while remaining > 0:
        n = min(chunk, remaining)
        g_hat, g_err = draw_channel_batch(large_scale, config, rng, n, with_error)
        c_mat = g_hat.transpose(0, 2, 1)
        gram = c_mat @ c_mat.conj().transpose(0, 2, 1)
        bad = _singular_mask(gram)
        while np.any(bad):
            redrawn += int(np.sum(bad))
            if redrawn > budget:
                raise GramSingularError(
                    f"more than {100 * REDRAW_BUDGET:.0f}% of {n_samples} Gram draws "
                    f"were singular (rcond < {RCOND_MIN:g}); M={config.M} is too "
                    f"close to K={config.K} or a user is unreachable")
            idx = np.nonzero(bad)[0]
            redo_hat, redo_err = draw_channel_batch(
                large_scale, config, rng, len(idx), with_error)
            g_hat[idx] = redo_hat
            if with_error:
                g_err[idx] = redo_err
            c_mat[idx] = redo_hat.transpose(0, 2, 1)
            gram[idx] = c_mat[idx] @ c_mat[idx].conj().transpose(0, 2, 1)
            bad[:] = False
            bad[idx] = _singular_mask(gram[idx])
        yield ChannelChunk(g_hat=g_hat, g_err=g_err, c_mat=c_mat, gram=gram)
        remaining -= n


def estimate_inverse_gram_diag(
    large_scale: LargeScaleState,
    config: SimulationConfig,
    rng: np.random.Generator,
    n_samples: Optional[int] = None,
) -> np.ndarray:
    """Sample mean of the diagonal of (Ghat^H Ghat)^-1, shape (K,)."""
    n = n_samples or config.n_channel_samples
    acc = np.zeros(config.K)
    for ch in well_conditioned_chunks(large_scale, config, rng, n):
        inv = np.linalg.inv(ch.gram)
        acc += np.einsum("nkk->k", inv).real
    return acc / n


def estimate_delta(
    large_scale: LargeScaleState,
    config: SimulationConfig,
    rng: np.random.Generator,
    n_samples: Optional[int] = None,
) -> np.ndarray:
    """Sample mean of |(C C^H)^-1 C|^2, shape (K, M).

    Row sums of the result are the phi diagonal, and weighting the columns by
    per-antenna error variances gives the chi matrix; one sampling pass
    therefore serves the ZF precoding power rule and SINR jointly.
    """
    n = n_samples or config.n_channel_samples
    acc = np.zeros((config.K, config.M))
    for ch in well_conditioned_chunks(large_scale, config, rng, n):
        a = np.linalg.solve(ch.gram, ch.c_mat)
        acc += np.sum(a.real**2 + a.imag**2, axis=0)
    return acc / n
