"""Closed-loop spatial multiplexing abstraction: codebook, SINR, rates.

The codebook is DFT-based: beams b_k(delta)[n] = exp(j n (2 pi k / n_tx +
delta)) / sqrt(n_tx). Rank-r entries take r cyclically consecutive beams of
one rotation, so every entry is orthonormal and the set is closed under the
per-port sign flips a slant-swapped receiver induces. Receivers are linear
MMSE; rates use the truncated Shannon bound.
"""

import math
from dataclasses import dataclass

import numpy as np


class LinkAbstractionError(ValueError):
    pass


def noise_power_w(bandwidth_hz, noise_figure_db):
    """Thermal noise power over ``bandwidth_hz`` in watts (-174 dBm/Hz PSD)."""
    if bandwidth_hz <= 0:
        raise LinkAbstractionError("bandwidth must be > 0")
    dbm = -174.0 + 10.0 * math.log10(bandwidth_hz) + noise_figure_db
    return 10.0 ** ((dbm - 30.0) / 10.0)


def _dft_beams(n_tx, rotation):
    n = np.arange(n_tx)
    k = np.arange(n_tx)
    phase = np.outer(n, 2.0 * math.pi * k / n_tx + rotation)
    return np.exp(1j * phase) / math.sqrt(n_tx)   # columns are beams


def build_codebook(n_tx):
    """Ordered precoder candidates, lowest rank first then entry index.

    n_tx = 1 degenerates to the scalar [[1]]. For n_tx = 4 every rank has 8
    entries: 4 cyclic beam windows x 2 rotations for ranks 1-3, 8 rotations
    of the full DFT matrix for rank 4.
    """
    if n_tx not in (1, 2, 4):
        raise LinkAbstractionError("codebook defined for n_tx in {1, 2, 4}")
    if n_tx == 1:
        return [np.ones((1, 1), dtype=complex)]

    entries = []
    partial_rots = [2.0 * math.pi * m / (2 * n_tx) for m in range(2)]
    for rank in range(1, n_tx):
        for rot in partial_rots:
            beams = _dft_beams(n_tx, rot)
            for start in range(n_tx):
                cols = [(start + i) % n_tx for i in range(rank)]
                entries.append(beams[:, cols])
    n_full = 8 if n_tx == 4 else 2
    for m in range(n_full):
        entries.append(_dft_beams(n_tx, 2.0 * math.pi * m / (n_tx * n_full)))
    return entries


def stack_codebook(codebook, n_tx):
    """Zero-pad entries to a fixed-width tensor for batched evaluation.

    Returns (padded (n_entries, n_tx, max_rank), ranks (n_entries,)).
    Zero columns carry no power and score zero rate, so they are inert.
    """
    max_rank = max(p.shape[1] for p in codebook)
    padded = np.zeros((len(codebook), n_tx, max_rank), dtype=complex)
    ranks = np.zeros(len(codebook), dtype=int)
    for i, p in enumerate(codebook):
        padded[i, :, : p.shape[1]] = p
        ranks[i] = p.shape[1]
    return padded, ranks


def mmse_sinr_from_covariance(effective, covariance):
    """Per-layer MMSE SINR given the total covariance (signal included).

    ``effective``: (..., n_rx, n_layers) precoded channel columns, power
    applied. ``covariance``: (..., n_rx, n_rx) = noise + interference + own
    signal. Uses u = a^H R^-1 a, sinr = u / (1 - u); zero columns give 0.
    """
    inv = np.linalg.inv(covariance)
    u = (effective.conj() * (inv @ effective)).sum(axis=-2).real
    u = np.clip(u, 0.0, 1.0 - 1e-15)
    return u / (1.0 - u)


def compute_sinr(h_serv, precoder, interferer_set, noise_power):
    """Post-MMSE per-layer SINR for one (UE, RB).

    ``h_serv`` carries the serving link's full amplitude and per-layer power
    (scale its columns by sqrt(p) beforehand); each interferer is a tuple
    (h_i, precoder_i, power_i) entering the covariance as
    power_i * (h_i p_i)(h_i p_i)^H. Noise regularizes the covariance, so a
    rank-deficient interference sum never fails.
    """
    h_serv = np.atleast_2d(np.asarray(h_serv, dtype=complex))
    precoder = np.atleast_2d(np.asarray(precoder, dtype=complex))
    n_rx = h_serv.shape[0]
    if noise_power <= 0:
        raise LinkAbstractionError("noise_power must be > 0")

    a = h_serv @ precoder
    cov = noise_power * np.eye(n_rx, dtype=complex)
    for h_i, p_i, power_i in interferer_set:
        b = np.atleast_2d(np.asarray(h_i, dtype=complex)) @ \
            np.atleast_2d(np.asarray(p_i, dtype=complex))
        cov = cov + power_i * (b @ b.conj().T)
    cov = cov + a @ a.conj().T
    return mmse_sinr_from_covariance(a, cov)


def select_precoder(h, codebook, noise_plus_interference):
    """Pick the sum-rate-best codebook entry for one channel matrix.

    ``noise_plus_interference`` is the per-rx-antenna linear power (scalar or
    length-n_rx vector), treated as a diagonal covariance. Ties resolve to
    the lowest rank, then the lowest entry index, via strict argmax over the
    (rank, index)-ordered codebook.
    """
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    n_rx = h.shape[0]
    npi = np.asarray(noise_plus_interference, dtype=float)
    if npi.ndim == 0:
        npi = np.full(n_rx, float(npi))
    if np.any(npi <= 0):
        raise LinkAbstractionError("noise_plus_interference must be > 0")
    base = np.diag(npi).astype(complex)

    best_idx, best_cap = 0, -1.0
    for idx, p in enumerate(codebook):
        a = h @ p
        cov = base + a @ a.conj().T
        sinr = mmse_sinr_from_covariance(a, cov)
        cap = float(np.log2(1.0 + sinr).sum())
        if cap > best_cap + 1e-12:
            best_idx, best_cap = idx, cap
    return codebook[best_idx], best_idx


def sinr_to_rate(sinr, rb_bandwidth, tti, efficiency=0.6, se_cap=7.4):
    """Truncated Shannon bits for one RB/TTI grant (per layer).

    bits = tti * rb_bandwidth * min(efficiency * log2(1 + sinr), se_cap)
    """
    sinr = np.asarray(sinr, dtype=float)
    if np.any(sinr < 0):
        raise LinkAbstractionError("sinr must be >= 0")
    se = np.minimum(efficiency * np.log2(1.0 + sinr), se_cap)
    bits = tti * rb_bandwidth * se
    return bits if bits.ndim else float(bits)


@dataclass
class SinrReport:
    """Per-(UE, RB) link adaptation outcome."""
    ue_id: int
    rb: int
    rank: int
    precoder_index: int
    layer_sinr: np.ndarray
    rate_bits: float
