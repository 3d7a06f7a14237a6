"""Asymptotic decoy-state BB84 key rate as a function of crosstalk noise."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import DwdmParams, QkdParams

NO_THRESHOLD = math.inf  # p_th when the per-channel rate floor is disabled


class RateModelError(ArithmeticError):
    """Error probabilities left [0, 1]; the parameter set is corrupt."""


class InfeasibleLinkError(ValueError):
    """The requested key rate cannot be reached even without crosstalk."""


def binary_entropy(x):
    x = np.asarray(x, dtype=float)
    inside = (x > 0) & (x < 1)
    xs = np.where(inside, x, 0.5)
    h = -xs * np.log2(xs) - (1 - xs) * np.log2(1 - xs)
    out = np.where(inside, h, 0.0)
    return float(out) if out.ndim == 0 else out


def transmissivity(qkd: QkdParams, dwdm: DwdmParams) -> float:
    return 0.5 * qkd.eta_d * 10 ** (-dwdm.alpha_db * dwdm.length_km / 10)


def y0_from_noise(p_m, qkd: QkdParams):
    """Background click probability for two detectors with ``p_m`` crosstalk."""
    s = np.minimum(qkd.p_dc + np.asarray(p_m, dtype=float), 1.0)
    y0 = s * (2 - s)  # 1 - (1 - s)**2 without the cancellation at small s
    return float(y0) if y0.ndim == 0 else y0


def noise_from_y0(y0, qkd: QkdParams):
    y0 = np.asarray(y0, dtype=float)
    return y0 / (1 + np.sqrt(1 - y0)) - qkd.p_dc


@dataclass(frozen=True)
class _Terms:
    q_mu: np.ndarray
    e_mu: np.ndarray
    q_1: np.ndarray
    e_1: np.ndarray


def _terms(y0, eta: float, qkd: QkdParams) -> _Terms:
    y0 = np.asarray(y0, dtype=float)
    lost = math.exp(-eta * qkd.mu)
    y1 = 1 - (1 - y0) * (1 - eta)
    q_mu = 1 - (1 - y0) * lost
    e_mu = (y0 / 2 + qkd.e_d * (1 - lost)) / q_mu
    q_1 = y1 * qkd.mu * math.exp(-qkd.mu)
    e_1 = (y0 / 2 + qkd.e_d * eta) / y1
    tol = 1e-12
    if np.any((e_mu < -tol) | (e_mu > 1 + tol) | (e_1 < -tol) | (e_1 > 1 + tol)):
        raise RateModelError("error rate outside [0, 1]")
    return _Terms(q_mu, e_mu, q_1, e_1)


def pulse_rate(y0, eta: float, qkd: QkdParams):
    """Secret bits per pulse before clipping at zero; may be negative."""
    t = _terms(y0, eta, qkd)
    out = t.q_1 * (1 - binary_entropy(t.e_1)) - qkd.f_ec * t.q_mu * binary_entropy(t.e_mu)
    return float(out) if np.ndim(out) == 0 else out


def secret_key_rate(p_m, qkd: QkdParams, dwdm: DwdmParams):
    """Key rate in bit/s of one channel carrying ``p_m`` crosstalk photons/gate."""
    eta = transmissivity(qkd, dwdm)
    out = np.maximum(0.0, pulse_rate(y0_from_noise(p_m, qkd), eta, qkd)) / qkd.t_s
    return float(out) if np.ndim(out) == 0 else out


def _bisect_decreasing(f, target, lo, hi, tol):
    """Smallest x in [lo, hi] (to ``tol``) with ``f(x) <= target``; f non-increasing."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) > target:
            lo = mid
        else:
            hi = mid
    return hi


def noise_threshold(r_th: float, qkd: QkdParams, dwdm: DwdmParams, tol: float = 1e-15) -> float:
    """Crosstalk photon count at which the key rate falls to ``r_th``.

    Negative ``r_th`` switches the floor off and returns ``inf``.
    """
    if r_th < 0:
        return NO_THRESHOLD
    r0 = secret_key_rate(0.0, qkd, dwdm)
    if r_th >= r0:
        raise InfeasibleLinkError(
            f"r_th={r_th:.6g} bit/s is not below the zero-noise rate {r0:.6g} bit/s"
        )
    return _bisect_decreasing(
        lambda p: secret_key_rate(p, qkd, dwdm), r_th, 0.0, 1.0 - qkd.p_dc, tol
    )


@dataclass(frozen=True)
class LinearRateModel:
    """Per-pulse key rate as a straight line in the background yield.

    ``x1 = 1 - h(e1)`` and ``x2 = h(E_mu)`` are replaced by their chords
    ``a*e1 + b`` and ``k*E_mu + j`` over the positive-rate range, which makes
    the per-pulse rate exactly ``u*Y0 + v``.
    """

    a: float
    b: float
    k: float
    j: float
    u: float
    v: float
    y0_zero: float
    e1_zero: float
    emu_zero: float
    p_zero: float
    p_dc: float
    t_s: float

    def pulse_rate_y0(self, y0):
        return self.u * np.asarray(y0, dtype=float) + self.v

    def pulse_rate(self, p_m):
        """Line in ``p_m`` obtained with ``Y0 ~ 2 p_dc + 2 p_m``."""
        return 2 * self.u * np.asarray(p_m, dtype=float) + 2 * self.u * self.p_dc + self.v

    def rate(self, p_m):
        out = np.maximum(0.0, self.pulse_rate(p_m)) / self.t_s
        return float(out) if np.ndim(out) == 0 else out


def fit_linear_model(qkd: QkdParams, dwdm: DwdmParams) -> LinearRateModel:
    eta = transmissivity(qkd, dwdm)
    y0_min = y0_from_noise(0.0, qkd)
    if pulse_rate(y0_min, eta, qkd) <= 0:
        raise InfeasibleLinkError("no key at zero crosstalk; nothing to linearise")
    y0z = _bisect_decreasing(lambda y: pulse_rate(y, eta, qkd), 0.0, y0_min, 1.0, 1e-16)
    t = _terms(y0z, eta, qkd)
    e1z, emuz = float(t.e_1), float(t.e_mu)
    if not (e1z < 0.5 and emuz < 0.5):
        raise RateModelError(
            f"zero-rate error rates e1={e1z:.4g}, E_mu={emuz:.4g} must stay below 0.5"
        )
    e_d = qkd.e_d

    def x1(e):
        return 1 - binary_entropy(e)

    a = (x1(e1z) - x1(e_d)) / (e1z - e_d)
    b = x1(e_d) - a * e_d
    k = (binary_entropy(emuz) - binary_entropy(e_d)) / (emuz - e_d)
    j = binary_entropy(e_d) - k * e_d

    mu, f = qkd.mu, qkd.f_ec
    s1 = mu * math.exp(-mu)
    lost = math.exp(-eta * mu)
    u = a / 2 * s1 + b * (1 - eta) * s1 - k / 2 * f - f * j * lost
    v = a * eta * e_d * s1 + b * eta * s1 - k * f * e_d * (1 - lost) - f * j * (1 - lost)
    return LinearRateModel(
        a, b, k, j, u, v, y0z, e1z, emuz,
        p_zero=noise_threshold(0.0, qkd, dwdm),
        p_dc=qkd.p_dc,
        t_s=qkd.t_s,
    )


def chord_pulse_rate(model: LinearRateModel, y0, qkd: QkdParams, dwdm: DwdmParams):
    """Per-pulse rate with the two chords substituted into the exact gains."""
    t = _terms(y0, transmissivity(qkd, dwdm), qkd)
    out = t.q_1 * (model.a * t.e_1 + model.b) - qkd.f_ec * t.q_mu * (model.k * t.e_mu + model.j)
    return float(out) if np.ndim(out) == 0 else out
