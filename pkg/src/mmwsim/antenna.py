"""BS antenna pattern, vertical array factor and polarization coupling.

Element pattern is the standard parabolic sector model:

    A_az = min(12 (az / bw_az)^2, FBR)
    A_el = min(12 (el / bw_el)^2, SLA_v)
    G    = G_max - min(A_az + A_el, FBR)

The vertical stack of ``vertical_panels * elements_per_panel`` elements is a
uniform half-wavelength array; electrical downtilt is applied as the array
steering phase (90 deg is zenith-referenced boresight, i.e. broadside), while
mechanical downtilt rotates the element pattern's coordinate frame.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class AntennaConfig:
    max_element_gain_dbi: float = 8.0
    azimuth_3db_beamwidth_deg: float = 65.0
    elevation_3db_beamwidth_deg: float = 65.0
    front_back_ratio_db: float = 30.0
    sla_v_db: float = 30.0
    electrical_downtilt_deg: float = 90.0   # 90 = broadside
    mechanical_downtilt_deg: float = 0.0
    mechanical_slant_deg: float = 0.0       # rotates the polarization frame
    vertical_panels: int = 2
    horizontal_panels: int = 1
    elements_per_panel: int = 2

    @property
    def n_vertical_elements(self):
        return self.vertical_panels * self.elements_per_panel

    @property
    def steer_elevation_deg(self):
        # zenith-referenced downtilt: 90 deg steers to the horizon
        return self.electrical_downtilt_deg - 90.0

    @classmethod
    def from_scenario(cls, cfg):
        return cls(
            max_element_gain_dbi=cfg.max_element_gain_dbi,
            azimuth_3db_beamwidth_deg=cfg.azimuth_3db_beamwidth_deg,
            elevation_3db_beamwidth_deg=cfg.elevation_3db_beamwidth_deg,
            front_back_ratio_db=cfg.front_back_ratio_db,
            sla_v_db=cfg.sla_v_db,
            electrical_downtilt_deg=cfg.electrical_downtilt_deg,
            mechanical_downtilt_deg=cfg.mechanical_downtilt_deg,
            mechanical_slant_deg=cfg.mechanical_slant_deg,
            vertical_panels=cfg.vertical_panels,
            horizontal_panels=cfg.horizontal_panels,
            elements_per_panel=cfg.elements_per_panel)


def element_gain(cfg, azimuth_deg, elevation_deg):
    """Single-element gain in dBi for angles relative to boresight.

    Azimuth cut loss saturates at the front-back ratio, elevation cut at the
    side-lobe floor; the combined loss is again capped by the front-back
    ratio. Even in both angles by construction.
    """
    az = np.asarray(azimuth_deg, dtype=float)
    el = np.asarray(elevation_deg, dtype=float) - cfg.mechanical_downtilt_deg
    a_az = np.minimum(
        12.0 * (az / cfg.azimuth_3db_beamwidth_deg) ** 2,
        cfg.front_back_ratio_db)
    a_el = np.minimum(
        12.0 * (el / cfg.elevation_3db_beamwidth_deg) ** 2,
        cfg.sla_v_db)
    loss = np.minimum(a_az + a_el, cfg.front_back_ratio_db)
    out = cfg.max_element_gain_dbi - loss
    return out if out.ndim else float(out)


def array_factor(cfg, elevation_deg):
    """Coherent gain (dB) of the vertical stack toward ``elevation_deg``.

    Half-wavelength spacing; amplitude-normalized so the steered direction
    gets 10*log10(N) and a single element gets 0 dB everywhere.
    """
    n = cfg.n_vertical_elements
    if n == 1:
        el = np.asarray(elevation_deg, dtype=float)
        zeros = np.zeros_like(el)
        return zeros if zeros.ndim else 0.0
    el = np.radians(np.asarray(elevation_deg, dtype=float))
    steer = math.radians(cfg.steer_elevation_deg)
    # phase step between adjacent elements, d = lambda/2
    psi = math.pi * (np.sin(el) - math.sin(steer))
    idx = np.arange(n)
    total = np.exp(1j * np.multiply.outer(psi, idx)).sum(axis=-1)
    amp = np.abs(total) / math.sqrt(n)
    out = 20.0 * np.log10(np.maximum(amp, 1e-30))
    return out if out.ndim else float(out)


def combined_gain(cfg, azimuth_deg, elevation_deg):
    """Element pattern plus array factor, dB."""
    return (element_gain(cfg, azimuth_deg, elevation_deg)
            + array_factor(cfg, elevation_deg))


@dataclass
class PolarizationSpec:
    """Dual-polarized transmitter against a single-polarized receiver.

    Slants are degrees in the polarization plane; 0 is the intended plane.
    The receiver is LPOL at 0 or XPOL at 90. ``xpd_db`` sets how much power
    the channel leaks into the orthogonal polarization (inf = none).
    """
    tx_slants_deg: tuple = (45.0, -45.0)
    rx_slant_deg: float = 0.0
    xpd_db: float = 8.0

    def leakage_power(self):
        if math.isinf(self.xpd_db):
            return 0.0
        return 10.0 ** (-self.xpd_db / 10.0)


def coupling_matrix(spec, leakage_phasors):
    """2x2 coupling for given unit-magnitude leakage phasors (one per port).

    Rows are the receiver axis and its orthogonal complement
    (rx_slant, rx_slant + 90); columns are the tx ports. Entry:

        C[i, j] = (cos(d_ij) + sqrt(g) * l_j * sin(d_ij)) / sqrt(1 + g)

    with d_ij the slant difference and g the XPD leakage power, so each
    column keeps unit total power for any phase draw.
    """
    g = spec.leakage_power()
    rx_axes = np.array([spec.rx_slant_deg, spec.rx_slant_deg + 90.0])
    tx = np.array(spec.tx_slants_deg, dtype=float)
    delta = np.radians(rx_axes[:, None] - tx[None, :])
    phasors = np.asarray(leakage_phasors, dtype=complex)
    cpl = np.cos(delta) + np.sqrt(g) * phasors[None, :] * np.sin(delta)
    return cpl / math.sqrt(1.0 + g)


def polarization_coupling(spec, rng):
    """Draw one static 2x2 coupling matrix; leakage phases uniform."""
    phases = rng.uniform(0.0, 2.0 * math.pi, size=len(spec.tx_slants_deg))
    return coupling_matrix(spec, np.exp(1j * phases))


def port_coupling_series(spec, leakage, depol):
    """Per-TTI coupling scalars on the receiver's own axis, one per tx port.

    This is the dynamic form used in channel assembly. ``leakage`` is a
    unit-magnitude Doppler-correlated phasor series (n_tti,), shared by both
    ports; ``depol`` multiplies whatever arrives in the unintended plane
    (coherence loss times wandering phase), which is the receiver's whole
    signal for XPOL and nothing for LPOL.
    """
    g = spec.leakage_power()
    rho = math.radians(spec.rx_slant_deg)
    tx = np.radians(np.asarray(spec.tx_slants_deg, dtype=float))
    leak = np.sqrt(g) * np.asarray(leakage, dtype=complex)[:, None]
    plane0 = np.cos(tx)[None, :] - leak * np.sin(tx)[None, :]
    plane90 = np.sin(tx)[None, :] + leak * np.cos(tx)[None, :]
    depol = np.asarray(depol, dtype=complex)[:, None]
    out = math.cos(rho) * plane0 + math.sin(rho) * depol * plane90
    return out / math.sqrt(1.0 + g)
