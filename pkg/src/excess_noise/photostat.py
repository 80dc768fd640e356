"""Photodetection statistics from a scattering matrix.

All closed forms are written for detection in transmission in terms of the
signal column ``v = t[:, m0]`` and the deficit ``D = 1 - r r^+ - t t^+``:

* excess generating function  ``F(xi) = alpha xi tau I0 v^+ (1 - alpha xi f D)^{-1} v``
* factorial cumulants         ``k_k = k! alpha^k tau f^{k-1} I0 v^+ D^{k-1} v``
* mean current                ``I = alpha I0 v^+ v``
* excess noise                ``P_exc = 2 alpha^2 f I0 v^+ D v``

Detection in reflection uses the same expressions after the exchange
``t -> r'``, ``r -> t'``.

The eigenvalues ``mu_i = alpha f lambda_i(D)`` are non-negative whenever the
sign of ``f`` matches the regime, so ``F`` is analytic for
``xi < 1/max(mu)``; this bound is reported as ``pgf_radius``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .detection import DetectionConfig
from .errors import (
    AccuracyWarning,
    DomainError,
    NumericalConsistencyError,
    StructuralError,
    UndefinedSignal,
)
from .scatter import ScatteringMatrix, deficit_matrix

MAX_CONTOUR_POINTS = 1 << 22


def _signal_and_deficit(sm: ScatteringMatrix, cfg: DetectionConfig):
    n = sm.n_modes
    if cfg.m0 >= n:
        raise StructuralError(f"m0={cfg.m0} out of range for N={n}")
    if sm.regime == "amplifying" and cfg.f > 0:
        raise ValueError("an amplifying medium needs f <= 0")
    if sm.regime == "absorbing" and cfg.f < 0:
        raise ValueError("an absorbing medium needs f >= 0")
    amp = sm.t if cfg.side == "transmission" else sm.r_prime
    return amp[:, cfg.m0].copy(), deficit_matrix(sm, cfg.side)


def _mu(d: np.ndarray, cfg: DetectionConfig) -> np.ndarray:
    return cfg.alpha * cfg.f * np.linalg.eigvalsh(d)


def _radius(mu: np.ndarray) -> float:
    top = float(mu.max()) if mu.size else 0.0
    return math.inf if top <= 0 else 1.0 / top


def pgf_radius(sm: ScatteringMatrix, cfg: DetectionConfig) -> float:
    """Largest ``xi`` below which ``1 - alpha xi f D`` stays positive definite."""
    _, d = _signal_and_deficit(sm, cfg)
    return _radius(_mu(d, cfg))


def _kernel(d, cfg, xi):
    m = np.eye(d.shape[0]) - (cfg.alpha * xi * cfg.f) * d
    if isinstance(xi, complex) or np.iscomplexobj(xi):
        return m
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        crit = _radius(_mu(d, cfg))
        raise DomainError(
            f"1 - alpha xi f D is not positive definite at xi={xi}; the series converges for xi < {crit:.6g}",
            critical_xi=crit,
        ) from None
    return m


def generating_function_exc(sm: ScatteringMatrix, cfg: DetectionConfig, xi):
    """Excess-noise part of ``ln sum_n (1+xi)^n p(n)``.

    ``xi`` may be complex (used for contour inversion); for real ``xi`` the
    kernel must be positive definite, otherwise :class:`DomainError` is raised
    carrying the critical ``xi``.
    """
    v, d = _signal_and_deficit(sm, cfg)
    if xi == 0:
        return 0.0
    m = _kernel(d, cfg, xi)
    val = cfg.alpha * xi * cfg.tau * cfg.I0 * (v.conj() @ np.linalg.solve(m, v))
    if isinstance(xi, complex) or np.iscomplexobj(xi):
        return complex(val)
    return float(val.real)


def factorial_cumulants(sm: ScatteringMatrix, cfg: DetectionConfig, k_max: int) -> np.ndarray:
    """``[k_1, ..., k_kmax]`` of the excess-noise generating function."""
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    v, d = _signal_and_deficit(sm, cfg)
    out = np.empty(k_max)
    w = v
    for k in range(1, k_max + 1):
        bil = (v.conj() @ w).real
        out[k - 1] = math.factorial(k) * cfg.alpha**k * cfg.tau * cfg.f ** (k - 1) * cfg.I0 * bil
        w = d @ w
    return out


@dataclass
class PhotonStatistics:
    mean_current: float
    noise_power: float
    excess_noise: float
    noise_figure: float
    cumulants: np.ndarray
    pgf_radius: float
    signal_defined: bool = True
    config_hash: str = ""
    photocounts: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cumulants"] = np.asarray(self.cumulants).tolist()
        d["photocounts"] = None if self.photocounts is None else np.asarray(self.photocounts).tolist()
        for key in ("noise_figure", "pgf_radius"):
            if math.isinf(d[key]):
                d[key] = "inf"
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _noise_figure_from(x: float, y: float, cfg: DetectionConfig) -> float:
    # x = v^+ v, y = v^+ (r r^+ + t t^+) v
    return -2 * cfg.f * y / x**2 + (1 + 2 * cfg.alpha * cfg.f) / (cfg.alpha * x)


def statistics(sm: ScatteringMatrix, cfg: DetectionConfig, k_max: int = 4) -> PhotonStatistics:
    """Mean current, noise powers, noise figure and cumulants for one matrix.

    A vanishing signal is not an error here: the noise figure comes back as
    ``inf`` with ``signal_defined=False`` so ensemble sweeps keep going.
    """
    v, d = _signal_and_deficit(sm, cfg)
    x = float((v.conj() @ v).real)
    dv = float((v.conj() @ d @ v).real)
    mean = cfg.alpha * cfg.I0 * x
    exc = 2 * cfg.alpha**2 * cfg.f * cfg.I0 * dv
    defined = x > 0
    nf = _noise_figure_from(x, x - dv, cfg) if defined else math.inf
    return PhotonStatistics(
        mean_current=mean,
        noise_power=mean + exc,
        excess_noise=exc,
        noise_figure=nf,
        cumulants=factorial_cumulants(sm, cfg, k_max),
        pgf_radius=_radius(_mu(d, cfg)),
        signal_defined=defined,
        config_hash=cfg.config_hash(),
    )


def noise_figure(sm: ScatteringMatrix, cfg: DetectionConfig) -> float:
    """Input signal-to-noise ratio over output signal-to-noise ratio.

    Independent of ``I0``. Raises :class:`UndefinedSignal` when no light
    reaches the detector from mode ``m0``.
    """
    v, d = _signal_and_deficit(sm, cfg)
    x = float((v.conj() @ v).real)
    if x <= 0:
        raise UndefinedSignal(f"no signal from mode {cfg.m0} reaches the detector")
    y = x - float((v.conj() @ d @ v).real)
    return _noise_figure_from(x, y, cfg)


def _trace_moments(sm: ScatteringMatrix, side: str):
    if side == "transmission":
        amp, other = sm.t, sm.r
    else:
        amp, other = sm.r_prime, sm.t_prime
    a = amp.conj().T @ amp
    b = amp.conj().T @ (other @ other.conj().T) @ amp
    return float(np.trace(a).real), float(np.trace(b + a @ a).real)


def noise_figure_trace_averaged(ensemble: Sequence[ScatteringMatrix], cfg: DetectionConfig) -> float:
    """Mode-averaged noise figure with numerator and denominator averaged separately."""
    mats = list(ensemble)
    if not mats:
        raise ValueError("ensemble is empty")
    n, regime = mats[0].n_modes, mats[0].regime
    if any(m.n_modes != n or m.regime != regime for m in mats):
        raise StructuralError("ensemble members differ in size or regime")
    sums = np.array([_trace_moments(m, cfg.side) for m in mats]).mean(axis=0)
    return noise_figure_from_traces(sums[0], sums[1], n, cfg)


def noise_figure_from_traces(mean_tr: float, mean_tr2: float, n_modes: int, cfg: DetectionConfig) -> float:
    """Trace-averaged noise figure from ``<tr t^+t>`` and ``<tr(t^+rr^+t + t^+tt^+t)>``."""
    if mean_tr <= 0:
        raise UndefinedSignal("mean transmitted trace vanishes")
    a = cfg.alpha
    return -2 * cfg.f * n_modes * mean_tr2 / mean_tr**2 + n_modes * (1 + 2 * a * cfg.f) / (a * mean_tr)


def trace_moments(sm: ScatteringMatrix, side: str = "transmission") -> dict:
    """Per-sample traces entering :func:`noise_figure_trace_averaged`."""
    tr1, tr2 = _trace_moments(sm, side)
    return {"tr": tr1, "tr2": tr2}


def spontaneous_term_integrand(sm: ScatteringMatrix, cfg: DetectionConfig, xi: float) -> float:
    """Spontaneous-emission contribution per unit frequency:
    ``-(tau/2 pi) ln det(1 - alpha xi f D)``."""
    _, d = _signal_and_deficit(sm, cfg)
    if xi == 0:
        return 0.0
    m = _kernel(d, cfg, xi)
    _, logdet = np.linalg.slogdet(m)
    return float(-cfg.tau / (2 * math.pi) * logdet)


def spontaneous_cumulants(sm: ScatteringMatrix, cfg: DetectionConfig, k_max: int, n_bins: int = 1) -> np.ndarray:
    """Factorial cumulants of spontaneous emission detected in ``n_bins``
    frequency bins of width ``2 pi / tau`` over which ``S`` is constant.

    ``k_k = n_bins (k-1)! tr[(alpha f D)^k]``.
    """
    _, d = _signal_and_deficit(sm, cfg)
    a = cfg.alpha * cfg.f * d
    out = np.empty(k_max)
    p = np.eye(d.shape[0])
    for k in range(1, k_max + 1):
        p = p @ a
        out[k - 1] = n_bins * math.factorial(k - 1) * np.trace(p).real
    return out


def photocount_distribution(
    sm: ScatteringMatrix,
    cfg: DetectionConfig,
    n_max: int,
    spontaneous_bins: int = 0,
    tol: float = 1e-13,
) -> np.ndarray:
    """Probabilities ``p(0..n_max)`` by inverting the generating function.

    The probability generating function ``G(z) = exp F(z - 1)`` is sampled on
    the unit circle and transformed with an FFT; the number of nodes starts
    at ``8 (n_max + 1)`` and is doubled until aliasing from the tail is below
    ``tol``. With ``spontaneous_bins > 0`` the spontaneous emission of that
    many frequency bins of width ``2 pi / tau`` is included.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    v, d = _signal_and_deficit(sm, cfg)
    mu = _mu(d, cfg)
    # the pole of G sits at z = 1 + 1/mu; it must lie outside the unit disk
    bad = mu[mu <= -0.5]
    if bad.size:
        raise DomainError(
            "the generating function is singular inside the unit circle; "
            "check the sign of f against the regime",
            critical_xi=float(1 / bad.min()),
        )
    # diagonalise once so every contour point costs O(N)
    lam, vecs = np.linalg.eigh(d)
    proj = np.abs(vecs.conj().T @ v) ** 2
    mu_d = cfg.alpha * cfg.f * lam
    scale = cfg.alpha * cfg.tau * cfg.I0

    def log_pgf(z):
        xi = z - 1.0
        denom = 1.0 - np.outer(xi, mu_d)
        val = scale * xi * (proj / denom).sum(axis=1)
        if spontaneous_bins:
            val = val - spontaneous_bins * np.log(denom).sum(axis=1)
        return val

    m = 8 * (n_max + 1)
    prev = None
    while True:
        z = np.exp(2j * np.pi * np.arange(m) / m)
        p = (np.fft.fft(np.exp(log_pgf(z))) / m).real
        if prev is not None and np.abs(p[: n_max + 1] - prev[: n_max + 1]).max() < tol:
            break
        if m >= MAX_CONTOUR_POINTS:
            raise DomainError(
                "photocount tail decays too slowly for contour inversion; reduce the gain or tau*I0"
            )
        prev = p
        m *= 2
    p = p[: n_max + 1]
    if p.min() < -1e-9:
        raise NumericalConsistencyError(f"negative probability {p.min():.3e} after inversion")
    before = p.sum()
    p = np.clip(p, 0.0, None)
    if p.sum() > 0:
        p *= before / p.sum()
    if p.sum() < 1 - 1e-6:
        warnings.warn(
            f"p(0..{n_max}) holds only {p.sum():.8f} of the probability; increase n_max",
            AccuracyWarning,
            stacklevel=2,
        )
    return p


def generating_function_exc_short_time(
    sm_grid: Sequence[tuple[float, ScatteringMatrix]],
    cfg: DetectionConfig,
    xi: float,
    omega0: float,
    occupation: Callable[[float], float] | None = None,
) -> float:
    """Excess generating function when the counting time is short compared
    with the inverse bandwidth of the deficit.

    The frequency-integrated deficit ``(tau/2 pi) int f(w) D(w) dw`` replaces
    ``f D``; the integral is a trapezoid rule over ``sm_grid``, which must be
    sorted by frequency and contain ``omega0``. ``occupation`` gives ``f(w)``
    (default: the constant ``cfg.f``).
    """
    grid = sorted(sm_grid, key=lambda p: p[0])
    if len(grid) < 2:
        raise ValueError("frequency grid needs at least two nodes")
    omegas = np.array([w for w, _ in grid], dtype=float)
    hits = np.flatnonzero(np.isclose(omegas, omega0, rtol=0, atol=1e-12 * max(1.0, abs(omega0))))
    if hits.size == 0:
        raise ValueError(f"omega0={omega0} is not a grid node")
    occ = occupation or (lambda w: cfg.f)
    defs = np.array([occ(w) * deficit_matrix(s, cfg.side) for w, s in grid])
    norms = np.linalg.norm(defs, axis=(1, 2))
    jumps = np.linalg.norm(np.diff(defs, axis=0), axis=(1, 2))
    ref = np.maximum(norms[:-1], norms[1:])
    if np.any(jumps > 0.1 * np.where(ref > 0, ref, np.inf)):
        warnings.warn("deficit varies by more than 10% between grid nodes", AccuracyWarning, stacklevel=2)
    integral = np.trapezoid(defs, omegas, axis=0)
    n = grid[0][1].n_modes
    kernel = np.eye(n) - (cfg.alpha * xi * cfg.tau / (2 * math.pi)) * integral
    sm0 = grid[int(hits[0])][1]
    v, _ = _signal_and_deficit(sm0, cfg)
    return float((cfg.alpha * xi * cfg.tau * cfg.I0 * (v.conj() @ np.linalg.solve(kernel, v))).real)
