"""Semiclassical Monte Carlo for photocount statistics.

Normally ordered averages of the quantum fields are replaced by averages over
classical amplitudes: the coherent input is a constant, and the noise the
medium adds is a complex Gaussian. One frequency bin of width ``2 pi / tau``
is used, so the integrated intensity is

    W = alpha * sum_{n detected} |(S a + V c*)_n|^2          (amplifier)
    W = alpha * sum_{n detected} |(S a + Q b)_n|^2           (absorber)

with ``a[m0] = sqrt(tau I0)``, ``V V^+ = S S^+ - 1``, ``Q Q^+ = 1 - S S^+``
and ``<|c_n|^2> = <|b_n|^2> = |f|``. Counts are Poisson with mean ``W``, so
the factorial cumulants of the counts are the ordinary cumulants of ``W``.

This module deliberately shares no code with the closed-form formulas.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .detection import DetectionConfig
from .errors import InvariantViolation
from .rng import RngSeed, generator, substream
from .scatter import PSD_RTOL, ScatteringMatrix

N_BATCHES = 20


@dataclass
class SemiclassicalSample:
    c_amplitudes: np.ndarray
    a_in: np.ndarray
    w: float


def noise_factor(sm: ScatteringMatrix) -> np.ndarray:
    """Hermitian positive semidefinite ``V`` with ``V V^+ = +-(S S^+ - 1)``.

    The sign is ``+`` for an amplifier and ``-`` for an absorber; a unitary
    matrix gives zero.
    """
    n2 = sm.s.shape[0]
    if sm.regime == "unitary":
        return np.zeros((n2, n2), dtype=np.complex128)
    g = sm.s @ sm.s.conj().T - np.eye(n2)
    g = 0.5 * (g + g.conj().T)
    if sm.regime == "absorbing":
        g = -g
    lam, vecs = np.linalg.eigh(g)
    floor = -PSD_RTOL * max(np.linalg.norm(sm.s, 2) ** 2, 1.0)
    if lam[0] < floor:
        raise InvariantViolation(f"noise covariance has eigenvalue {lam[0]:.3e} < 0")
    root = np.sqrt(np.clip(lam, 0.0, None))
    return (vecs * root) @ vecs.conj().T


def _detected(sm: ScatteringMatrix, side: str) -> slice:
    n = sm.n_modes
    return slice(n, 2 * n) if side == "transmission" else slice(0, n)


def _setup(sm, cfg, coupling_mutation):
    rows = _detected(sm, cfg.side)
    a = np.zeros(sm.s.shape[0], dtype=np.complex128)
    a[cfg.m0] = math.sqrt(cfg.tau * cfg.I0)
    signal = sm.s[rows] @ a
    v = noise_factor(sm)[rows]
    if coupling_mutation:
        v = v.conj()
    return a, signal, v


def _draw_w(signal, v, cfg, conjugate, rng, size):
    m = v.shape[1]
    scale = math.sqrt(abs(cfg.f) / 2)
    c = scale * (rng.standard_normal((size, m)) + 1j * rng.standard_normal((size, m)))
    noise = (c.conj() if conjugate else c) @ v.T
    out = signal[None, :] + noise
    return cfg.alpha * np.sum(out.real**2 + out.imag**2, axis=1), c


def draw_sample(sm: ScatteringMatrix, cfg: DetectionConfig, seed) -> SemiclassicalSample:
    """One realisation of the noise amplitudes and the resulting ``W``."""
    seed = seed if isinstance(seed, RngSeed) else RngSeed(int(seed))
    a, signal, v = _setup(sm, cfg, False)
    w, c = _draw_w(signal, v, cfg, sm.regime == "amplifying", generator(seed), 1)
    return SemiclassicalSample(c_amplitudes=c[0], a_in=a, w=float(w[0]))


def sample_w(sm: ScatteringMatrix, cfg: DetectionConfig, seed) -> float:
    """Integrated intensity ``W`` for one noise realisation."""
    return draw_sample(sm, cfg, seed).w


def sample_w_batch(
    sm: ScatteringMatrix,
    cfg: DetectionConfig,
    n_samples: int,
    seed,
    batches: int = N_BATCHES,
    coupling_mutation: bool = False,
):
    """``n_samples`` draws of ``W`` split over ``batches`` independent streams.

    Yields one array per batch; batch ``j`` always uses stream ``j`` of
    ``seed``, so the split is deterministic. ``coupling_mutation`` replaces the
    noise coupling by its complex conjugate and exists only so tests can show
    that this error is detectable.
    """
    seed = seed if isinstance(seed, RngSeed) else RngSeed(int(seed))
    _, signal, v = _setup(sm, cfg, coupling_mutation)
    conj = sm.regime == "amplifying"
    for j, size in enumerate(np.diff(np.linspace(0, n_samples, batches + 1).astype(int))):
        w, _ = _draw_w(signal, v, cfg, conj, substream(seed, j), int(size))
        yield w


@dataclass
class CumulantEstimate:
    kappa1: float
    kappa2: float
    stderr1: float
    stderr2: float
    n_samples: int
    seed: int
    spec_hash: str

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def problem_hash(sm: ScatteringMatrix, cfg: DetectionConfig) -> str:
    h = hashlib.sha256(sm.s.tobytes())
    h.update(sm.regime.encode())
    h.update(cfg.config_hash().encode())
    return h.hexdigest()[:16]


def _merge(acc, batch):
    # pairwise update of (count, mean, M2)
    n_a, mean_a, m2_a = acc
    n_b = batch.size
    mean_b = batch.mean()
    m2_b = np.sum((batch - mean_b) ** 2)
    n = n_a + n_b
    delta = mean_b - mean_a
    return n, mean_a + delta * n_b / n, m2_a + m2_b + delta**2 * n_a * n_b / n


def estimate_cumulants(
    sm: ScatteringMatrix,
    cfg: DetectionConfig,
    n_samples: int,
    seed,
    coupling_mutation: bool = False,
) -> CumulantEstimate:
    """Mean and variance of ``W`` with batch-means standard errors.

    These estimate the first two factorial cumulants of the photocount,
    spontaneous emission of the single frequency bin included.
    """
    if n_samples < 1000:
        raise ValueError(f"n_samples must be >= 1000, got {n_samples}")
    seed = seed if isinstance(seed, RngSeed) else RngSeed(int(seed))
    acc = (0, 0.0, 0.0)
    means, variances = [], []
    for w in sample_w_batch(sm, cfg, n_samples, seed, coupling_mutation=coupling_mutation):
        acc = _merge(acc, w)
        means.append(w.mean())
        variances.append(w.var(ddof=1))
    n, mean, m2 = acc
    k = len(means)
    return CumulantEstimate(
        kappa1=float(mean),
        kappa2=float(m2 / (n - 1)),
        stderr1=float(np.std(means, ddof=1) / math.sqrt(k)),
        stderr2=float(np.std(variances, ddof=1) / math.sqrt(k)),
        n_samples=int(n),
        seed=seed.base_seed,
        spec_hash=problem_hash(sm, cfg),
    )


def estimate_photocounts(
    sm: ScatteringMatrix, cfg: DetectionConfig, n_samples: int, seed
) -> np.ndarray:
    """Histogram of Poisson counts drawn with mean ``W``; entry ``n`` counts outcome ``n``."""
    seed = seed if isinstance(seed, RngSeed) else RngSeed(int(seed))
    counts = np.zeros(1, dtype=np.int64)
    for j, w in enumerate(sample_w_batch(sm, cfg, n_samples, seed)):
        draws = substream(seed, N_BATCHES + j).poisson(w)
        b = np.bincount(draws)
        if b.size > counts.size:
            counts = np.pad(counts, (0, b.size - counts.size))
        counts[: b.size] += b
    return counts
