"""Sweep definitions behind the command-line front end.

Each experiment turns a :class:`SweepConfig` into CSV rows (one per grid
point) holding Monte Carlo estimates next to the closed-form reference.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, stats

from . import analytic
from .detection import DetectionConfig
from .ensembles import (
    CavitySpec,
    WaveguideSpec,
    haar_coupling_batch,
    run_cavity_sweep,
    run_ensemble,
    sample_cavity,
)
from .errors import AccuracyWarning, ThresholdCrossed
from .oracle import estimate_cumulants, estimate_photocounts
from .photostat import (
    factorial_cumulants,
    noise_figure_from_traces,
    photocount_distribution,
    spontaneous_cumulants,
    trace_moments,
)
from .rng import RngSeed
from .scatter import ScatteringMatrix


class ConfigError(ValueError):
    """Invalid sweep configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class SweepConfig:
    experiment: str
    grid: list
    ensemble_size: int
    medium: dict = field(default_factory=dict)
    detection: dict = field(default_factory=dict)
    base_seed: int = 0
    output_path: str = "sweep.csv"
    threads: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"unknown experiment {self.experiment!r}; valid: {', '.join(EXPERIMENTS)}")
        try:
            self.grid = [float(x) for x in self.grid]
        except (TypeError, ValueError) as exc:
            raise ConfigError("grid", f"entries must be numbers ({exc})") from None
        if not self.grid:
            raise ConfigError("grid", "must be nonempty")
        d = np.diff(self.grid)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ConfigError("grid", "must be strictly monotone")
        if int(self.ensemble_size) != self.ensemble_size or self.ensemble_size < 0:
            raise ConfigError("ensemble_size", "must be a non-negative integer")
        self.ensemble_size = int(self.ensemble_size)
        if not 0 <= int(self.base_seed) < 2**64:
            raise ConfigError("base_seed", "must fit in 64 bits")
        self.base_seed = int(self.base_seed)
        if int(self.threads) < 1:
            raise ConfigError("threads", "must be >= 1")
        self.threads = int(self.threads)
        if not isinstance(self.medium, dict):
            raise ConfigError("medium", "must be a mapping")
        if not isinstance(self.detection, dict):
            raise ConfigError("detection", "must be a mapping")

    def detection_config(self) -> DetectionConfig:
        exp = EXPERIMENTS[self.experiment]
        merged = {**exp.detection, **self.detection}
        try:
            return DetectionConfig(**merged)
        except TypeError as exc:
            raise ConfigError("detection", str(exc)) from None
        except ValueError as exc:
            raise ConfigError("detection", str(exc)) from None

    def medium_params(self) -> dict:
        exp = EXPERIMENTS[self.experiment]
        unknown = set(self.medium) - set(exp.medium)
        if unknown:
            raise ConfigError("medium", f"unknown field(s) {sorted(unknown)} for {self.experiment}")
        return {**exp.medium, **self.medium}


def expand_grid(spec) -> list:
    """Grid from a list or from ``{start, stop, step}`` / ``{start, stop, num}``."""
    if isinstance(spec, dict):
        try:
            start, stop = float(spec["start"]), float(spec["stop"])
            if "num" in spec:
                return np.linspace(start, stop, int(spec["num"])).tolist()
            step = float(spec["step"])
        except KeyError as exc:
            raise ConfigError("grid", f"missing key {exc}") from None
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(n)]
    if isinstance(spec, (int, float)):
        return [float(spec)]
    return list(spec)


# ------------------------------------------------------------- helpers


def _jackknife_nf(tr, tr2, n_modes, det):
    n = len(tr)
    full = noise_figure_from_traces(tr.mean(), tr2.mean(), n_modes, det)
    if n < 2:
        return full, math.nan
    loo1 = (tr.sum() - tr) / (n - 1)
    loo2 = (tr2.sum() - tr2) / (n - 1)
    a = det.alpha
    vals = -2 * det.f * n_modes * loo2 / loo1**2 + n_modes * (1 + 2 * a * det.f) / (a * loo1)
    return full, float(math.sqrt((n - 1) / n * np.sum((vals - vals.mean()) ** 2)))


def _sem(x):
    return float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else math.nan


ENSEMBLE_COLUMNS = [
    "x",
    "n_samples",
    "rejected",
    "moment1",
    "moment1_stderr",
    "moment2",
    "moment2_stderr",
    "mean_current",
    "mean_current_stderr",
    "excess_noise",
    "excess_noise_stderr",
    "excess_coeff",
    "excess_coeff_stderr",
    "noise_figure",
    "noise_figure_stderr",
    "analytic_mean_current",
    "analytic_excess_noise",
    "analytic_excess_coeff",
    "analytic_noise_figure",
]


def _ensemble_row(x, tr, tr2, n_requested, rejected, n_modes, det, point, unit):
    """Mode-averaged estimates from per-sample traces.

    ``tr = tr(t^+ t)`` and ``tr2 = tr(t^+ r r^+ t + t^+ t t^+ t)`` per
    sample; ``unit`` converts the excess noise to plotting units.
    """
    row = {"x": x, "n_samples": n_requested - rejected, "rejected": rejected}
    a, f, i0 = det.alpha, det.f, det.I0
    if len(tr):
        m1 = tr / n_modes
        m2 = tr2 / n_modes
        cur = a * i0 * m1
        exc = 2 * a * a * f * i0 * (m1 - m2)
        nf, nf_err = _jackknife_nf(tr, tr2, n_modes, det) if tr.mean() > 0 else (math.inf, math.nan)
        for name, v in (("moment1", m1), ("moment2", m2), ("mean_current", cur), ("excess_noise", exc)):
            row[name] = float(v.mean())
            row[name + "_stderr"] = _sem(v)
        row["excess_coeff"] = row["excess_noise"] / unit if unit else math.nan
        row["excess_coeff_stderr"] = row["excess_noise_stderr"] / unit if unit else math.nan
        row["noise_figure"] = nf
        row["noise_figure_stderr"] = nf_err
    else:
        for name in ENSEMBLE_COLUMNS[3:15]:
            row[name] = math.nan
    if point is None:
        row.update(analytic_mean_current=math.nan, analytic_excess_noise=math.nan,
                   analytic_excess_coeff=math.nan, analytic_noise_figure=math.nan)
    else:
        row["analytic_mean_current"] = point.mean_current
        row["analytic_excess_noise"] = point.excess_noise
        row["analytic_excess_coeff"] = point.excess_noise / unit if unit else math.nan
        row["analytic_noise_figure"] = point.noise_figure
    return row


def _trace_stat(sm: ScatteringMatrix, side: str) -> dict:
    return trace_moments(sm, side)


# ----------------------------------------------------------- waveguide


def _waveguide_spec(m: dict, s: float, regime: str) -> WaveguideSpec:
    amp = math.inf if s == 0 else m["length"] / s
    return WaveguideSpec(
        n_modes=int(m["n_modes"]),
        mean_free_path=float(m["mean_free_path"]),
        length=float(m["length"]),
        amp_length=amp,
        regime=regime,
        n_slices=m.get("n_slices"),
        mfp_convention=m.get("mfp_convention", "transport"),
        margin=float(m.get("margin", 0.02)),
        allow_threshold=bool(m.get("allow_threshold", False)),
    )


def _run_waveguide(cfg: SweepConfig, regime: str):
    m = cfg.medium_params()
    det = cfg.detection_config()
    l_over_L = float(m["mean_free_path"]) / float(m["length"])
    ref = analytic.waveguide_amplifying if regime == "amplifying" else analytic.waveguide_absorbing
    unit = det.alpha**2 * l_over_L * abs(det.f) * det.I0
    rows, hashes = [], []
    for s in cfg.grid:
        try:
            spec = _waveguide_spec(m, s, regime)
        except ValueError as exc:
            raise ConfigError("grid", f"s={s}: {exc}") from None
        try:
            point = ref(s, l_over_L, det.alpha, det.f, det.side, det.I0)
        except ThresholdCrossed:
            point = None
        tr = tr2 = np.array([])
        rejected = 0
        if cfg.ensemble_size:
            res = run_ensemble(
                spec, cfg.ensemble_size, cfg.base_seed,
                functools.partial(_trace_stat, side=det.side), workers=cfg.threads,
            )
            hashes.append(res.spec_hash)
            rejected = res.n_rejected
            if res.values:
                tr, tr2 = res.values["tr"], res.values["tr2"]
        rows.append(_ensemble_row(s, tr, tr2, cfg.ensemble_size, rejected, spec.n_modes, det, point, unit))
    return ENSEMBLE_COLUMNS, rows, {"spec_hashes": hashes}


# -------------------------------------------------------------- cavity


def _run_cavity(cfg: SweepConfig, regime: str):
    m = cfg.medium_params()
    det = cfg.detection_config()
    if det.side != "reflection":
        raise ConfigError("detection.side", "a cavity is only detected in reflection")
    try:
        base = CavitySpec(
            n_modes=int(m["n_modes"]),
            gamma=0.0,
            regime=regime,
            n_levels=m.get("n_levels"),
            level_spacing=float(m.get("level_spacing", 1.0)),
            pole_window=float(m.get("pole_window", 0.3)),
            margin=float(m.get("margin", 0.02)),
            allow_threshold=bool(m.get("allow_threshold", False)),
        )
    except ValueError as exc:
        raise ConfigError("medium", str(exc)) from None
    for g in cfg.grid:
        try:
            CavitySpec(**{**base.__dict__, "gamma": g})
        except ValueError as exc:
            raise ConfigError("grid", f"gamma={g}: {exc}") from None
    ref = analytic.cavity_amplifying if regime == "amplifying" else analytic.cavity_absorbing
    unit = det.alpha**2 * abs(det.f) * det.I0
    results = None
    if cfg.ensemble_size:
        results = run_cavity_sweep(
            base, cfg.grid, cfg.ensemble_size, cfg.base_seed, functools.partial(_trace_stat, side="reflection")
        )
    rows = []
    for k, g in enumerate(cfg.grid):
        point = ref(g, det.alpha, det.f, det.I0)
        tr = tr2 = np.array([])
        rejected = 0
        if results is not None:
            res = results[k]
            rejected = res.n_rejected
            if res.values:
                tr, tr2 = res.values["tr"], res.values["tr2"]
        rows.append(_ensemble_row(g, tr, tr2, cfg.ensemble_size, rejected, base.n_modes, det, point, unit))
    hashes = [r.spec_hash for r in results] if results else []
    return ENSEMBLE_COLUMNS, rows, {"spec_hashes": hashes}


# ----------------------------------------------------------- threshold


THRESHOLD_COLUMNS = [
    "x",
    "n_samples",
    "rejected",
    "ks_statistic",
    "ks_pvalue",
    "bin_width",
    "mode",
    "analytic_mode",
    "median",
    "analytic_median",
    "truncated_mean_1",
    "truncated_mean_2",
    "truncated_mean_3",
    "truncated_mean_4",
    "analytic_truncated_mean_1",
    "analytic_truncated_mean_2",
    "analytic_truncated_mean_3",
    "analytic_truncated_mean_4",
]


def threshold_samples(n: int, n_samples: int, seed, f: float = -1.0, m0: int = 0) -> np.ndarray:
    """Threshold noise figures of a cavity with Haar-distributed couplings."""
    u = haar_coupling_batch(n, n_samples, seed)
    return -2 * f / np.abs(u[:, m0]) ** 2


def truncation_points(n: int) -> list:
    return [n * 10.0**k for k in range(1, 5)]


def threshold_truncated_mean(x: float, n: int, f: float = -1.0) -> float:
    """``int_{-2f}^{x} F p(F) dF``; grows like ``2|f|(n-1) ln x``."""
    lo = -2 * f
    if x <= lo:
        return 0.0
    # substitute F = lo/y to tame the long tail
    val, _ = integrate.quad(lambda y: lo / y * analytic.threshold_pdf(lo / y, n, f) * lo / y**2, lo / x, 1.0, limit=200)
    return val


def threshold_histogram(samples: np.ndarray, n: int, f: float = -1.0):
    """Histogram with bins of width ``0.25 n`` starting at ``-2f``.

    Returns ``(edges, density)``; the last bin edge covers ``40 n``.
    """
    width = 0.25 * n
    lo = -2 * f
    edges = lo + width * np.arange(int(np.ceil((40 * n - lo) / width)) + 1)
    counts, _ = np.histogram(samples, bins=edges)
    return edges, counts / (len(samples) * width)


def threshold_row(n: int, samples: np.ndarray, f: float = -1.0) -> dict:
    ks = stats.kstest(samples, lambda x: analytic.threshold_cdf(x, n, f))
    edges, dens = threshold_histogram(samples, n, f)
    k = int(np.argmax(dens))
    med_exact = -2 * f / (1 - 0.5 ** (1 / (n - 1)))
    row = {
        "x": float(n),
        "n_samples": len(samples),
        "rejected": 0,
        "ks_statistic": float(ks.statistic),
        "ks_pvalue": float(ks.pvalue),
        "bin_width": 0.25 * n,
        "mode": 0.5 * (edges[k] + edges[k + 1]),
        "analytic_mode": analytic.threshold_typical(n, f),
        "median": float(np.median(samples)),
        "analytic_median": med_exact,
    }
    for j, x in enumerate(truncation_points(n), start=1):
        row[f"truncated_mean_{j}"] = float(np.sum(np.where(samples <= x, samples, 0.0)) / len(samples))
        row[f"analytic_truncated_mean_{j}"] = threshold_truncated_mean(x, n, f)
    return row


def _run_threshold(cfg: SweepConfig):
    det = cfg.detection_config()
    if not det.f < 0:
        raise ConfigError("detection.f", "threshold statistics need an inverted medium (f < 0)")
    rows, hist = [], []
    for x in cfg.grid:
        n = int(x)
        if n != x or n < 2:
            raise ConfigError("grid", f"channel counts must be integers >= 2, got {x}")
        if det.m0 >= n:
            raise ConfigError("detection.m0", f"m0={det.m0} out of range for N={n}")
        if not cfg.ensemble_size:
            rows.append({c: math.nan for c in THRESHOLD_COLUMNS} | {"x": float(n), "n_samples": 0, "rejected": 0,
                         "analytic_mode": analytic.threshold_typical(n, det.f)})
            continue
        samples = threshold_samples(n, cfg.ensemble_size, RngSeed(cfg.base_seed, n), det.f, det.m0)
        rows.append(threshold_row(n, samples, det.f))
        edges, dens = threshold_histogram(samples, n, det.f)
        exact = np.diff(analytic.threshold_cdf(edges, n, det.f)) / np.diff(edges)
        for a, b, c, d in zip(edges[:-1], edges[1:], dens, exact):
            hist.append({"x": float(n), "bin_lo": a, "bin_hi": b, "density": c, "analytic_density": d})
    return THRESHOLD_COLUMNS, rows, {"histogram": (["x", "bin_lo", "bin_hi", "density", "analytic_density"], hist)}


# -------------------------------------------------------------- oracle


ORACLE_COLUMNS = [
    "x",
    "n_samples",
    "rejected",
    "kappa1",
    "kappa1_stderr",
    "analytic_kappa1",
    "z1",
    "kappa2",
    "kappa2_stderr",
    "analytic_kappa2",
    "z2",
]


def scalar_amplifier(gain: float) -> ScatteringMatrix:
    """Single-mode reflectionless amplifier with intensity gain ``gain``."""
    g = math.sqrt(gain)
    regime = "unitary" if gain == 1 else ("amplifying" if gain > 1 else "absorbing")
    return ScatteringMatrix.from_blocks([[0]], [[g]], [[g]], [[0]], regime)


def oracle_case(n: int, gamma: float, base_seed: int, max_tries: int = 1000):
    """First non-lasing cavity of ``n`` channels at rate ``gamma`` from a fixed seed sequence.

    Returns ``(matrix, rejected)`` where ``rejected`` counts lasing draws skipped.
    """
    spec = CavitySpec(n, gamma)
    for i in range(max_tries):
        try:
            return sample_cavity(spec, RngSeed(base_seed, i)), i
        except ThresholdCrossed:
            continue
    raise ThresholdCrossed(f"no non-lasing cavity in {max_tries} draws")


def closed_form_counts(sm: ScatteringMatrix, det: DetectionConfig) -> np.ndarray:
    """First two factorial cumulants including one bin of spontaneous emission."""
    return factorial_cumulants(sm, det, 2) + spontaneous_cumulants(sm, det, 2)


def oracle_row(x, sm, det, n_samples, seed, rejected=0) -> dict:
    est = estimate_cumulants(sm, det, n_samples, seed)
    k1, k2 = closed_form_counts(sm, det)
    return {
        "x": float(x),
        "n_samples": n_samples,
        "rejected": rejected,
        "kappa1": est.kappa1,
        "kappa1_stderr": est.stderr1,
        "analytic_kappa1": float(k1),
        "z1": (est.kappa1 - k1) / est.stderr1 if est.stderr1 > 0 else 0.0,
        "kappa2": est.kappa2,
        "kappa2_stderr": est.stderr2,
        "analytic_kappa2": float(k2),
        "z2": (est.kappa2 - k2) / est.stderr2 if est.stderr2 > 0 else 0.0,
    }


def _run_oracle(cfg: SweepConfig):
    m = cfg.medium_params()
    rows = []
    if cfg.ensemble_size and cfg.ensemble_size < 1000:
        raise ConfigError("ensemble_size", "oracle estimates need at least 1000 samples")
    for x in cfg.grid:
        n = int(x)
        if n != x or n < 1:
            raise ConfigError("grid", f"channel counts must be positive integers, got {x}")
        if n == 1 and m["kind"] == "scalar":
            sm, rejected = scalar_amplifier(float(m["gain"])), 0
            det = cfg.detection_config().replace(side="transmission", m0=0)
        else:
            sm, rejected = oracle_case(n, float(m["gamma"]), cfg.base_seed)
            det = cfg.detection_config().replace(side="reflection", m0=min(cfg.detection_config().m0, n - 1))
        if not cfg.ensemble_size:
            k1, k2 = closed_form_counts(sm, det)
            rows.append({c: math.nan for c in ORACLE_COLUMNS} | {"x": float(n), "n_samples": 0, "rejected": rejected,
                         "analytic_kappa1": float(k1), "analytic_kappa2": float(k2)})
            continue
        rows.append(oracle_row(n, sm, det, cfg.ensemble_size, RngSeed(cfg.base_seed, 10_000 + n), rejected))
    return ORACLE_COLUMNS, rows, {}


# ---------------------------------------------------------- photocount


PHOTOCOUNT_COLUMNS = ["x", "n_samples", "rejected", "probability", "probability_stderr", "analytic_probability"]


def _run_photocount(cfg: SweepConfig):
    m = cfg.medium_params()
    det = cfg.detection_config().replace(side="transmission", m0=0)
    ns = [int(x) for x in cfg.grid]
    if any(n != x or n < 0 for n, x in zip(ns, cfg.grid)):
        raise ConfigError("grid", "photocount values must be non-negative integers")
    sm = scalar_amplifier(float(m["gain"]))
    bins = int(m["spontaneous_bins"])
    with warnings.catch_warnings():
        # only the requested counts are reported, so missing tail mass is expected
        warnings.simplefilter("ignore", AccuracyWarning)
        exact = photocount_distribution(sm, det, max(ns), spontaneous_bins=bins)
    counts = None
    if cfg.ensemble_size:
        if bins != 1 and sm.regime != "unitary":
            raise ConfigError("medium.spontaneous_bins", "the sampler models exactly one frequency bin")
        counts = estimate_photocounts(sm, det, cfg.ensemble_size, RngSeed(cfg.base_seed))
    rows = []
    for n in ns:
        row = {"x": float(n), "n_samples": cfg.ensemble_size, "rejected": 0, "analytic_probability": float(exact[n])}
        if counts is not None:
            p = counts[n] / cfg.ensemble_size if n < counts.size else 0.0
            row["probability"] = p
            row["probability_stderr"] = math.sqrt(p * (1 - p) / cfg.ensemble_size)
        else:
            row["probability"] = row["probability_stderr"] = math.nan
        rows.append(row)
    return PHOTOCOUNT_COLUMNS, rows, {}


# ------------------------------------------------------------ registry


@dataclass(frozen=True)
class Experiment:
    name: str
    summary: str
    grid: list
    ensemble_size: int
    medium: dict
    detection: dict
    runtime: str
    run: Callable


EXPERIMENTS: dict = {}


def _register(**kw):
    EXPERIMENTS[kw["name"]] = Experiment(**kw)


_WG = {"n_modes": 50, "mean_free_path": 1.0, "length": 10.0, "n_slices": None,
       "mfp_convention": "transport", "margin": 0.02, "allow_threshold": False}
_CAV = {"n_modes": 50, "n_levels": 500, "level_spacing": 1.0, "pole_window": 0.3,
        "margin": 0.02, "allow_threshold": False}

_register(
    name="waveguide_fig2",
    summary=(
        "Amplifying diffusive waveguide detected in transmission (or reflection). "
        "Compares the ensemble mean current, excess noise and trace-averaged noise "
        "figure with the large-N closed forms in s = L/xi_a: mean current "
        "(4l/3L) s/sin(s) and the matching excess-noise bracket. The laser "
        "threshold is at s = pi, where the noise figure diverges."
    ),
    grid=[0.5, 1.0, math.pi / 2, 2.0, 2.5],
    ensemble_size=100,
    medium=_WG,
    detection={"alpha": 1.0, "f": -1.0, "side": "transmission"},
    runtime="about 0.5 s per sample at N=50, L/l=10 (about 4 min for the defaults)",
    run=lambda cfg: _run_waveguide(cfg, "amplifying"),
)
_register(
    name="waveguide_fig5",
    summary=(
        "Absorbing diffusive waveguide: excess noise in units of alpha^2 l |f| I0 / L "
        "against s = L/xi_a (hyperbolic continuation s -> i s of the amplifying "
        "forms). The transmitted excess noise peaks near s = 2."
    ),
    grid=np.round(np.arange(0.5, 6.01, 0.5), 12).tolist(),
    ensemble_size=20,
    medium={**_WG, "n_modes": 20},
    detection={"alpha": 1.0, "f": 1.0, "side": "transmission"},
    runtime="about 0.1 s per sample at N=20 (about 30 s for the defaults)",
    run=lambda cfg: _run_waveguide(cfg, "absorbing"),
)
_register(
    name="cavity_fig3",
    summary=(
        "Amplifying chaotic cavity detected in reflection: trace-averaged noise "
        "figure against gamma, compared with (1 - g + g^2 + g^3)/(1 - g)^2 at "
        "alpha = 1, f = -1. The laser threshold is at gamma = 1."
    ),
    grid=np.round(np.arange(0.1, 0.81, 0.1), 12).tolist(),
    ensemble_size=200,
    medium=_CAV,
    detection={"alpha": 1.0, "f": -1.0, "side": "reflection"},
    runtime="about 0.3 s per sample for all grid points together at N=50, M=500 (about 1 min)",
    run=lambda cfg: _run_cavity(cfg, "amplifying"),
)
_register(
    name="cavity_fig6",
    summary=(
        "Absorbing chaotic cavity: excess noise in units of alpha^2 |f| I0 against "
        "the absorption rate gamma, from 2 g (g^2 + g + 1)/(1 + g)^4. The maximum "
        "is near gamma = 1."
    ),
    grid=np.round(np.arange(0.25, 4.01, 0.25), 12).tolist(),
    ensemble_size=100,
    medium=_CAV,
    detection={"alpha": 1.0, "f": 1.0, "side": "reflection"},
    runtime="about 0.1 s per sample for all grid points together (about 15 s)",
    run=lambda cfg: _run_cavity(cfg, "absorbing"),
)
_register(
    name="threshold_fig4",
    summary=(
        "Noise figure of a cavity at the laser threshold, where one resonance "
        "dominates: F = -2f / |u_m0|^2 with u a rotation-invariant unit vector of "
        "N couplings. Grid values are channel counts N. Reports a KS test against "
        "p(F) = -2f(N-1)(1 + 2f/F)^(N-2) / F^2, the histogram mode (most probable "
        "value F = N at f = -1) and truncated means, which grow without bound."
    ),
    grid=[2, 5, 10],
    ensemble_size=100_000,
    medium={},
    detection={"alpha": 1.0, "f": -1.0, "side": "reflection"},
    runtime="under a second per grid point at 1e5 samples",
    run=_run_threshold,
)
_register(
    name="oracle_validate",
    summary=(
        "Checks the closed-form factorial cumulants (excess part plus one frequency "
        "bin of spontaneous emission) against the independent semiclassical sampler. "
        "Grid values are channel counts; N = 1 uses a scalar amplifier of the given "
        "gain when medium.kind is 'scalar', otherwise a cavity at rate gamma."
    ),
    grid=[1, 2, 3],
    ensemble_size=100_000,
    medium={"kind": "scalar", "gain": 2.0, "gamma": 0.3},
    detection={"alpha": 1.0, "f": -1.0, "I0": 1.0, "tau": 1.0},
    runtime="about a second per grid point at 1e5 samples",
    run=_run_oracle,
)
_register(
    name="photocount",
    summary=(
        "Photocount distribution of a single-mode amplifier: contour inversion of "
        "the generating function (one bin of spontaneous emission included) against "
        "a Poisson-mixture histogram from the semiclassical sampler. Grid values are "
        "photocounts n."
    ),
    grid=list(range(0, 21)),
    ensemble_size=1_000_000,
    medium={"gain": 2.0, "spontaneous_bins": 1},
    detection={"alpha": 1.0, "f": -1.0, "I0": 1.0, "tau": 1.0},
    runtime="a few seconds at 1e6 samples",
    run=_run_photocount,
)


def describe(name: str) -> str:
    if name not in EXPERIMENTS:
        raise KeyError(f"unknown experiment {name!r}; valid experiments: {', '.join(EXPERIMENTS)}")
    e = EXPERIMENTS[name]
    lines = [
        f"{e.name}",
        "",
        e.summary,
        "",
        f"default grid: {', '.join(f'{x:g}' for x in e.grid)}",
        f"default ensemble_size: {e.ensemble_size}",
        f"default medium: {e.medium}",
        f"default detection: {e.detection}",
        f"expected runtime: {e.runtime}",
    ]
    return "\n".join(lines)


def default_config(name: str, **overrides) -> SweepConfig:
    e = EXPERIMENTS[name]
    base = dict(experiment=name, grid=list(e.grid), ensemble_size=e.ensemble_size)
    base.update(overrides)
    return SweepConfig(**base)


def run_sweep(cfg: SweepConfig):
    """Run ``cfg`` and return ``(columns, rows, extras)``."""
    return EXPERIMENTS[cfg.experiment].run(cfg)
