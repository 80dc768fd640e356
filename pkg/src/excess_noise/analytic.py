"""Closed-form large-N ensemble averages used as references for the sampler.

Waveguide results depend on ``s = L/xi_a`` and ``l/L``; cavity results on
the dimensionless rate ``gamma``. Currents are in units of ``I0`` unless an
explicit ``I0`` is passed. Excess-noise coefficients use the plotting units
``alpha^2 l |f| I0 / L`` (waveguide) and ``alpha^2 |f| I0`` (cavity).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ThresholdCrossed

SERIES_CROSSOVER = 0.2
THRESHOLD_FLAG_MARGIN = 0.02

# Taylor coefficients in powers of s^2 (s^0 .. s^12), exact rationals.
_SERIES = {
    "i_t": [1, 1 / 6, 7 / 360, 31 / 15120, 127 / 604800, 73 / 3421440, 1414477 / 653837184000],
    "p_t": [0, -2 / 3, -2 / 9, -61 / 1260, -19 / 2160, -247 / 171072, -150967 / 681080400],
    "i_r": [1, -1 / 3, -1 / 45, -2 / 945, -1 / 4725, -2 / 93555, -1382 / 638512875],
    "p_r": [0, -4 / 3, -19 / 90, -5 / 126, -1073 / 151200, -1777 / 1496880, -10190239 / 54486432000],
}


@dataclass(frozen=True)
class CurvePoint:
    """One point of a reference curve.

    ``mean_current_coeff`` is ``I/(alpha I0 4l/3L)`` for waveguide
    transmission and ``I/(alpha I0)`` otherwise; ``excess_coeff`` is the
    excess noise in plotting units. ``flag`` is ``"threshold"`` within 2% of
    the laser threshold and empty otherwise.
    """

    x: float
    mean_current: float
    excess_noise: float
    mean_current_coeff: float
    excess_coeff: float
    noise_figure: float
    side: str = "transmission"
    flag: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _series(name, s):
    s2 = s * s
    acc = 0.0
    for c in reversed(_SERIES[name]):
        acc = acc * s2 + c
    return acc


def waveguide_kernels(s: complex) -> tuple:
    """``(s/sin s, P_t, s cot s, P_r)`` for complex ``s``.

    ``P_t`` and ``P_r`` are the brackets of the transmission and reflection
    excess noise multiplied by ``s``; the cancellations near ``s = 0`` are
    handled by the Taylor series below ``|s| = SERIES_CROSSOVER``.
    """
    s = complex(s)
    if abs(s) < SERIES_CROSSOVER:
        return tuple(_series(k, s) for k in ("i_t", "p_t", "i_r", "p_r"))
    sn = np.sin(s)
    ct = np.cos(s) / sn
    i_t = s / sn
    p_t = s * (3 / sn - (2 * s - ct) / sn**2 + (s * ct - 1) / sn**3 - s / sn**4)
    i_r = s * ct
    p_r = s * (2 * ct - 1 / sn + ct / sn**2 + (s * ct - 1) / sn**3 - s / sn**4)
    return complex(i_t), complex(p_t), complex(i_r), complex(p_r)


def _hyperbolic_kernels(s: float) -> tuple:
    if s < SERIES_CROSSOVER:
        # s -> i s flips the sign of every other Taylor coefficient
        return tuple(_series(k, 1j * s).real for k in ("i_t", "p_t", "i_r", "p_r"))
    if s > 350:
        inv_sh, ch = 2 * math.exp(-s), 1.0
    else:
        inv_sh, ch = 1 / math.sinh(s), 1 / math.tanh(s)
    i_t = s * inv_sh
    p_t = s * (3 * inv_sh - (2 * s + ch) * inv_sh**2 - (s * ch - 1) * inv_sh**3 + s * inv_sh**4)
    i_r = s * ch
    p_r = s * (2 * ch - inv_sh - ch * inv_sh**2 - (s * ch - 1) * inv_sh**3 + s * inv_sh**4)
    return i_t, p_t, i_r, p_r


def _noise_figure(mean, exc, I0):
    # divide twice so that a tiny mean does not underflow when squared
    return math.inf if mean == 0 else (exc + mean) / mean * I0 / mean


def _waveguide_point(s, kernels, l_over_L, alpha, f, side, I0, flag):
    i_t, p_t, i_r, p_r = kernels
    if side == "transmission":
        coeff = i_t
        mean = alpha * I0 * (4 / 3) * l_over_L * i_t
        bracket = p_t
    elif side == "reflection":
        coeff = 1 - (4 / 3) * l_over_L * i_r
        mean = alpha * I0 * coeff
        bracket = p_r
    else:
        raise ValueError(f"unknown side {side!r}")
    exc = (2 / 3) * alpha**2 * l_over_L * f * I0 * bracket
    exc_coeff = (2 / 3) * math.copysign(1.0, f) * bracket if f != 0 else 0.0
    return CurvePoint(
        x=s,
        mean_current=mean,
        excess_noise=exc,
        mean_current_coeff=coeff,
        excess_coeff=exc_coeff,
        noise_figure=_noise_figure(mean, exc, I0),
        side=side,
        flag=flag,
    )


def waveguide_amplifying(
    s: float, l_over_L: float, alpha: float = 1.0, f: float = -1.0, side: str = "transmission", I0: float = 1.0
) -> CurvePoint:
    """Amplifying diffusive waveguide, ``0 <= s < pi``."""
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    if s >= math.pi:
        raise ThresholdCrossed(f"s = {s} is at or beyond the laser threshold s = pi")
    kern = tuple(k.real for k in waveguide_kernels(s))
    flag = "threshold" if s > math.pi * (1 - THRESHOLD_FLAG_MARGIN) else ""
    return _waveguide_point(s, kern, l_over_L, alpha, f, side, I0, flag)


def waveguide_absorbing(
    s: float, l_over_L: float, alpha: float = 1.0, f: float = 1.0, side: str = "transmission", I0: float = 1.0
) -> CurvePoint:
    """Absorbing diffusive waveguide, ``s = L/xi_a >= 0`` with ``xi_a`` the absorption length."""
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    return _waveguide_point(s, _hyperbolic_kernels(s), l_over_L, alpha, f, side, I0, "")


def _cavity_point(gamma, mean_coeff, exc_coeff_signed, alpha, f, I0, flag):
    mean = alpha * I0 * mean_coeff
    exc = 2 * alpha**2 * f * I0 * exc_coeff_signed
    return CurvePoint(
        x=gamma,
        mean_current=mean,
        excess_noise=exc,
        mean_current_coeff=mean_coeff,
        excess_coeff=2 * math.copysign(1.0, f) * exc_coeff_signed if f != 0 else 0.0,
        noise_figure=_noise_figure(mean, exc, I0),
        side="reflection",
        flag=flag,
    )


def cavity_amplifying(gamma: float, alpha: float = 1.0, f: float = -1.0, I0: float = 1.0) -> CurvePoint:
    """Amplifying chaotic cavity detected in reflection, ``gamma < 1``.

    Negative ``gamma`` is accepted as the analytic continuation.
    """
    if gamma >= 1:
        raise ThresholdCrossed(f"gamma = {gamma} is at or beyond the laser threshold gamma = 1")
    g = gamma
    flag = "threshold" if g > 1 - THRESHOLD_FLAG_MARGIN else ""
    return _cavity_point(g, 1 / (1 - g), g * (g - g * g - 1) / (1 - g) ** 4, alpha, f, I0, flag)


def cavity_amplifying_noise_figure(gamma: float) -> float:
    """Noise figure at ``alpha = 1``, ``f = -1`` in its factored form."""
    if gamma >= 1:
        raise ThresholdCrossed(f"gamma = {gamma} is at or beyond the laser threshold gamma = 1")
    g = gamma
    return (1 - g + g * g + g**3) / (1 - g) ** 2


def cavity_absorbing(gamma: float, alpha: float = 1.0, f: float = 1.0, I0: float = 1.0) -> CurvePoint:
    """Absorbing chaotic cavity detected in reflection, ``gamma >= 0``."""
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    g = gamma
    return _cavity_point(g, 1 / (1 + g), g * (g * g + g + 1) / (1 + g) ** 4, alpha, f, I0, "")


# ---------------------------------------------------------- threshold


def threshold_noise_figure(sigma, m0: int, f: float = -1.0) -> float:
    """Noise figure at threshold of a single resonance with couplings ``sigma``.

    ``-2 f sum|sigma|^2 / |sigma_m0|^2``; infinite if mode ``m0`` is uncoupled.
    """
    sigma = np.asarray(sigma, dtype=np.complex128)
    w = abs(sigma[m0]) ** 2
    if w == 0:
        return math.inf
    return float(-2 * f * np.sum(np.abs(sigma) ** 2) / w)


def _check_pdf_args(n, f):
    if n < 2:
        raise ValueError(f"N must be >= 2, got {n}")
    if not f < 0:
        raise ValueError(f"f must be negative, got {f}")


def threshold_pdf(F, n: int, f: float = -1.0):
    """Density of the threshold noise figure for a cavity with ``n`` channels."""
    _check_pdf_args(n, f)
    F = np.asarray(F, dtype=float)
    inside = F >= -2 * f
    Fs = np.where(inside, F, 1.0)
    val = -2 * f * (n - 1) * (1 + 2 * f / Fs) ** (n - 2) / Fs**2
    out = np.where(inside, val, 0.0)
    return out if out.ndim else float(out)


def threshold_cdf(F, n: int, f: float = -1.0):
    """Cumulative distribution ``(1 + 2f/F)^(n-1)`` for ``F >= -2f``."""
    _check_pdf_args(n, f)
    F = np.asarray(F, dtype=float)
    inside = F >= -2 * f
    Fs = np.where(inside, F, 1.0)
    out = np.where(inside, (1 + 2 * f / Fs) ** (n - 1), 0.0)
    return out if out.ndim else float(out)


def threshold_typical(n: int, f: float = -1.0) -> float:
    """Most probable threshold noise figure, ``-f n``."""
    _check_pdf_args(n, f)
    return -f * n
