"""Crosstalk photon counts seen by the quantum receivers.

Powers are in W, lengths in km, bandwidths in nm. Photon counts are per
detector gate and already include the factor 1/2 of the decoder loss.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .grid import HC, DwdmParams, QkdParams


class Direction(enum.Enum):
    CO_PROPAGATING = "co"
    COUNTER_PROPAGATING = "counter"


@dataclass(frozen=True)
class NoiseBreakdown:
    p_fr: float = 0.0
    p_br: float = 0.0
    p_fc: float = 0.0
    p_bc: float = 0.0

    @property
    def total(self) -> float:
        return self.p_fr + self.p_br + self.p_fc + self.p_bc

    def __add__(self, other: NoiseBreakdown) -> NoiseBreakdown:
        return NoiseBreakdown(
            self.p_fr + other.p_fr,
            self.p_br + other.p_br,
            self.p_fc + other.p_fc,
            self.p_bc + other.p_bc,
        )


def forward_length_km(dwdm: DwdmParams) -> float:
    """Effective interaction length of co-propagating Raman noise."""
    return math.exp(-dwdm.alpha_lin * dwdm.length_km) * dwdm.length_km


def backward_length_km(dwdm: DwdmParams) -> float:
    """Effective interaction length of counter-propagating Raman noise."""
    a, L = dwdm.alpha_lin, dwdm.length_km
    if a == 0:
        return L
    return -math.expm1(-2 * a * L) / (2 * a)


def forward_raman_power(I, params: DwdmParams, beta_val, delta_lambda_nm):
    return I * forward_length_km(params) * beta_val * delta_lambda_nm


def backward_raman_power(I, params: DwdmParams, beta_val, delta_lambda_nm):
    return I * backward_length_km(params) * beta_val * delta_lambda_nm


def photon_count(power_w, lambda_q_nm, qkd: QkdParams):
    """Mean photons per gate reaching the detectors for ``power_w`` in band."""
    return power_w * lambda_q_nm * 1e-9 * qkd.t_d * qkd.eta_d / (2 * HC)


def raman_photon_count(I_raman, lambda_q_nm, qkd: QkdParams):
    return photon_count(I_raman, lambda_q_nm, qkd)


def raman_constants(I, params: DwdmParams, delta_lambda_nm, qkd: QkdParams):
    """Wavelength-free prefactors ``(C_f, C_b)``.

    Multiplying by ``lambda_q_nm * beta`` gives the forward and backward Raman
    photon counts of one classical/quantum pair.
    """
    k = I * delta_lambda_nm * 1e-9 * qkd.t_d * qkd.eta_d / (2 * HC)
    return k * forward_length_km(params), k * backward_length_km(params)


def adjacent_crosstalk_power(
    direction: Direction, I, params: DwdmParams, channel_separation: int
) -> float:
    """Leakage from a classical channel ``channel_separation`` grid steps away.

    Only immediate neighbours leak. Back-reflected light carries no span loss.
    """
    if channel_separation < 1:
        raise ValueError("classical and quantum channels share a wavelength")
    if channel_separation > 1:
        return 0.0
    if direction is Direction.CO_PROPAGATING:
        return (
            params.g_a * I * math.exp(-params.alpha_lin * params.length_km)
            * 10 ** (-params.gamma_a / 10)
        )
    return params.g_a * I * 10 ** (-params.chi_a / 10)
