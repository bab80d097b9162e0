"""Run accounting and the three study metrics.

Average UE throughput  T_avg = sum_k T_k / n          (bit/s)
Spectral efficiency    S     = sum_k T_k / B          (bit/s/Hz)
Jain fairness          J     = (sum T_k)^2 / (n sum T_k^2), in [1/n, 1]
"""

from dataclasses import dataclass, field

import numpy as np


class KpiError(ValueError):
    pass


class AllZeroThroughputError(KpiError):
    """Jain's index is 0/0 when every UE saw zero throughput."""


@dataclass
class ThroughputLedger:
    """Accumulates granted bits per UE over a run; bits only increase."""
    bits: dict = field(default_factory=dict)

    def add(self, ue_id, bits):
        if bits < 0:
            raise KpiError("granted bits must be >= 0")
        self.bits[ue_id] = self.bits.get(ue_id, 0.0) + float(bits)

    def throughputs(self, duration_s, ue_ids=None):
        """bit/s per UE over the run duration; unserved UEs count as 0."""
        if duration_s <= 0:
            raise KpiError("duration must be > 0")
        ids = sorted(self.bits) if ue_ids is None else sorted(ue_ids)
        return {u: self.bits.get(u, 0.0) / duration_s for u in ids}


def average_ue_throughput(throughputs):
    """Mean per-UE throughput, bit/s."""
    values = _values(throughputs)
    return float(np.sum(values) / values.size)


def spectral_efficiency(throughputs, bandwidth_hz):
    """Aggregate served rate normalized by system bandwidth, bit/s/Hz."""
    if bandwidth_hz <= 0:
        raise KpiError("bandwidth must be > 0")
    values = _values(throughputs)
    return float(np.sum(values) / bandwidth_hz)


def jain_fairness(throughputs):
    """Jain's index; 1 means perfectly even, 1/n a single-UE monopoly.

    The index is scale-free, so values are normalized by their maximum
    before squaring: equal vectors come out exactly 1.0 and a single
    winner exactly 1/n, at any magnitude, with no overflow.
    """
    values = _values(throughputs)
    top = float(np.max(values))
    if top == 0.0:
        raise AllZeroThroughputError(
            "fairness undefined: all throughputs are zero")
    values = values / top
    total_sq = float(np.sum(values)) ** 2
    denom = values.size * float(np.sum(values ** 2))
    return total_sq / denom


def _values(throughputs):
    if isinstance(throughputs, dict):
        values = np.asarray(list(throughputs.values()), dtype=float)
    else:
        values = np.asarray(throughputs, dtype=float)
    if values.size == 0:
        raise KpiError("no UEs in KPI population")
    if np.any(values < 0):
        raise KpiError("throughputs must be >= 0")
    return values


@dataclass
class KpiRecord:
    """One sweep point's results row (plus consistency bookkeeping)."""
    scheduler: str
    polarization: str
    velocity_kmph: float
    seed: int
    avg_ue_throughput_bps: float
    spectral_efficiency_bps_hz: float
    fairness_index: float
    n_ues: int
    bandwidth_hz: float

    @property
    def avg_ue_throughput_mbps(self):
        return self.avg_ue_throughput_bps / 1e6
