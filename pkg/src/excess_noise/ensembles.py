"""Random media: disordered waveguide, chaotic cavity, single-pole model.

Every generator is a pure function of ``(spec, seed)``; the random stream
comes from :func:`excess_noise.rng.generator`, so a sample is reproduced
bit for bit from its seed alone.

Waveguide model
---------------
The waveguide is a cascade of ``n_slices`` thin sections composed with the
star product. Each section is the symmetric unitary

    [[i sqrt(R) U1 U1^T,        sqrt(1-R) U1 U2^T],
     [sqrt(1-R) U2 U1^T,   i sqrt(R) U2 U2^T    ]]

with independent Haar ``U1, U2``, multiplied by a uniform amplitude gain
``lam`` (``lam > 1`` amplifies, ``lam < 1`` absorbs). The reflectance ``R``
and gain are calibrated on the incoherent (flux) version of the same cascade
so that

* without gain the mean transmission is ``ell / (L + ell)`` where ``ell`` is
  the backscattering length for the chosen mean-free-path convention, and
* the laser threshold of the flux model sits exactly at ``s = L/xi_a = pi``.

Cavity model
------------
``r(w0) = 1 - 2 pi i W^T (w0 - H + i pi W W^T - i eta)^{-1} W`` with ``H`` a
GOE matrix of size ``M`` (mean level spacing ``delta`` at the band centre),
ideal coupling to ``N`` channels, and ``eta = 1/(2 tau_a) = gamma N delta / (4 pi)``.
The resolvent is evaluated in the eigenbasis of ``H`` so that a sweep over
``gamma`` reuses one diagonalisation.
"""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Sequence

import numpy as np
import yaml
from scipy.optimize import brentq
from scipy.stats import unitary_group

from .errors import ExcessNoiseError, InvariantViolation, ThresholdCrossed
from .rng import RngSeed, generator
from .scatter import ScatteringMatrix, identity_transmission, star_compose

MFP_CONVENTIONS = ("transport", "dmpk")
DEFAULT_MARGIN = 0.02
POLE_GUARD = 1e-12


def _as_seed(seed) -> RngSeed:
    return seed if isinstance(seed, RngSeed) else RngSeed(int(seed))


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``n x n`` unitary matrix."""
    if n == 1:
        return np.exp(2j * np.pi * rng.random((1, 1)))
    return unitary_group.rvs(n, random_state=rng)


# ---------------------------------------------------------------- specs


@dataclass(frozen=True)
class WaveguideSpec:
    """Disordered waveguide of ``n_modes`` channels.

    Parameters
    ----------
    n_modes : int
    mean_free_path : float
        Transport mean free path ``l``.
    length : float
        Length ``L``. ``L = 0`` is the empty waveguide.
    amp_length : float
        Amplification (or absorption) length ``xi_a``; ``inf`` for no gain.
    regime : {"amplifying", "absorbing", "unitary"}
    n_slices : int, optional
        Number of sections; defaults to and must be at least ``ceil(20 L / l)``.
    mfp_convention : {"transport", "dmpk"}
        ``"transport"`` sets the backscattering length so that the mean
        transmission without gain is ``4l/3L`` in the diffusive limit (this
        needs ``L > 4l/3``). ``"dmpk"`` uses ``l`` itself, giving ``l/(L+l)``.
    margin : float
        Relative distance from threshold below which amplifying specs are
        rejected unless ``allow_threshold`` is set.
    allow_threshold : bool
        Permit ``s`` up to (but excluding) ``pi``; lasing samples then raise
        :class:`ThresholdCrossed` per sample and are counted by
        :func:`run_ensemble`.
    """

    n_modes: int
    mean_free_path: float
    length: float
    amp_length: float = math.inf
    regime: str = "amplifying"
    n_slices: int | None = None
    mfp_convention: str = "transport"
    margin: float = DEFAULT_MARGIN
    allow_threshold: bool = False

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError(f"n_modes must be >= 1, got {self.n_modes}")
        if not self.mean_free_path > 0:
            raise ValueError(f"mean_free_path must be > 0, got {self.mean_free_path}")
        if not self.length >= 0:
            raise ValueError(f"length must be >= 0, got {self.length}")
        if not self.amp_length > 0:
            raise ValueError(f"amp_length must be > 0, got {self.amp_length}")
        if self.regime not in ("amplifying", "absorbing", "unitary"):
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.mfp_convention not in MFP_CONVENTIONS:
            raise ValueError(f"mfp_convention must be one of {MFP_CONVENTIONS}")
        min_slices = self.min_slices
        if self.n_slices is None:
            object.__setattr__(self, "n_slices", min_slices)
        elif self.n_slices < min_slices:
            raise ValueError(f"n_slices must be >= ceil(20 L/l) = {min_slices}, got {self.n_slices}")
        if (
            self.mfp_convention == "transport"
            and self.length > 0
            and 3 * self.length <= 4 * self.mean_free_path
        ):
            raise ValueError(
                "the transport convention needs L > 4l/3; use mfp_convention='dmpk' for thin slabs"
            )
        if self.regime == "amplifying":
            limit = math.pi if self.allow_threshold else math.pi * (1 - self.margin)
            if self.s >= limit:
                raise ValueError(
                    f"s = L/xi_a = {self.s:.6g} is at or beyond the threshold guard {limit:.6g}"
                )

    @property
    def min_slices(self) -> int:
        return max(1, math.ceil(20 * self.length / self.mean_free_path))

    @property
    def s(self) -> float:
        """Dimensionless gain ``L / xi_a`` (zero for the unitary regime)."""
        if self.regime == "unitary" or math.isinf(self.amp_length):
            return 0.0
        return self.length / self.amp_length

    @property
    def backscatter_length(self) -> float:
        l, L = self.mean_free_path, self.length
        if self.mfp_convention == "dmpk":
            return l
        return 4 * l * L / (3 * L - 4 * l)


@dataclass(frozen=True)
class CavitySpec:
    """Chaotic cavity coupled to one ``n_modes`` waveguide.

    ``gamma`` is the dimensionless rate ``2 pi / (N tau_a delta)``; the
    regime fixes its sign. ``pole_window`` is the half-width of the band
    region (in units of the band radius) searched for lasing poles; poles
    outside it sit where the finite GOE spectrum has an unphysically large
    level spacing.
    """

    n_modes: int
    gamma: float = 0.0
    regime: str = "amplifying"
    n_levels: int | None = None
    level_spacing: float = 1.0
    pole_window: float = 0.3
    margin: float = DEFAULT_MARGIN
    allow_threshold: bool = False

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError(f"n_modes must be >= 1, got {self.n_modes}")
        if self.n_levels is None:
            object.__setattr__(self, "n_levels", 10 * self.n_modes)
        if self.n_levels < 10 * self.n_modes:
            raise ValueError(f"n_levels must be >= 10 N = {10 * self.n_modes}, got {self.n_levels}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.regime not in ("amplifying", "absorbing", "unitary"):
            raise ValueError(f"unknown regime {self.regime!r}")
        if not self.level_spacing > 0:
            raise ValueError("level_spacing must be > 0")
        if not 0 < self.pole_window <= 1:
            raise ValueError("pole_window must be in (0, 1]")
        if self.regime == "amplifying":
            limit = 1.0 if self.allow_threshold else 1.0 - self.margin
            if self.gamma >= limit:
                raise ValueError(f"gamma = {self.gamma} is at or beyond the threshold guard {limit}")

    @property
    def eta(self) -> float:
        """Signed half amplification rate ``1/(2 tau_a)`` (negative when absorbing)."""
        if self.regime == "unitary":
            return 0.0
        sign = 1.0 if self.regime == "amplifying" else -1.0
        return sign * self.gamma * self.n_modes * self.level_spacing / (4 * math.pi)


@dataclass(frozen=True)
class PoleSpec:
    """Single isolated resonance near threshold.

    ``S_nm = sigma_n sigma_m / (omega - resonance + i decay/2 - i amp_rate/2)``.

    ``geometry="two_sided"`` needs ``2N`` couplings (left modes first);
    ``"cavity"`` takes ``N`` couplings and places the pole matrix in the
    left reflection block.
    """

    couplings: tuple
    decay: float
    amp_rate: float
    resonance: float = 0.0
    geometry: str = "two_sided"

    def __post_init__(self):
        c = tuple(complex(x) for x in np.ravel(self.couplings))
        object.__setattr__(self, "couplings", c)
        if not self.decay > 0:
            raise ValueError(f"decay must be > 0, got {self.decay}")
        if self.amp_rate < 0:
            raise ValueError(f"amp_rate must be >= 0, got {self.amp_rate}")
        if self.geometry not in ("two_sided", "cavity"):
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if self.geometry == "two_sided" and len(c) % 2:
            raise ValueError("two-sided geometry needs an even number of couplings")
        if not c:
            raise ValueError("couplings must be nonempty")

    @property
    def sigma_total(self) -> float:
        return float(sum(abs(x) ** 2 for x in self.couplings))

    def to_dict(self) -> dict:
        return {
            "couplings_re": [x.real for x in self.couplings],
            "couplings_im": [x.imag for x in self.couplings],
            "decay": self.decay,
            "amp_rate": self.amp_rate,
            "resonance": self.resonance,
            "geometry": self.geometry,
        }


_SPEC_KINDS = {"waveguide": WaveguideSpec, "cavity": CavitySpec, "pole": PoleSpec}


def spec_to_dict(spec) -> dict:
    for kind, cls in _SPEC_KINDS.items():
        if isinstance(spec, cls):
            body = spec.to_dict() if isinstance(spec, PoleSpec) else asdict(spec)
            return {"kind": kind, **body}
    raise TypeError(f"not a medium spec: {type(spec).__name__}")


def spec_from_dict(data: dict):
    data = dict(data)
    kind = data.pop("kind", None)
    if kind not in _SPEC_KINDS:
        raise ValueError(f"spec 'kind' must be one of {sorted(_SPEC_KINDS)}, got {kind!r}")
    if kind == "pole":
        re = data.pop("couplings_re")
        im = data.pop("couplings_im", [0.0] * len(re))
        data["couplings"] = tuple(complex(a, b) for a, b in zip(re, im))
    cls = _SPEC_KINDS[kind]
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown {kind} spec field(s): {sorted(unknown)}")
    if "amp_length" in data and data["amp_length"] in ("inf", "infinity", None):
        data["amp_length"] = math.inf
    return cls(**data)


def spec_hash(spec) -> str:
    blob = json.dumps(spec_to_dict(spec), sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def dump_spec_yaml(spec, path) -> None:
    d = spec_to_dict(spec)
    if d.get("amp_length") == math.inf:
        d["amp_length"] = "inf"
    with open(path, "w") as fh:
        yaml.safe_dump(d, fh, sort_keys=False)


def load_spec_yaml(path):
    with open(path) as fh:
        return spec_from_dict(yaml.safe_load(fh))


# ------------------------------------------------------------ waveguide


def flux_threshold_phase(gain: float, reflectance: float, n_slices: int) -> float:
    """Signed dimensionless gain of the incoherent slice cascade.

    For ``n`` identical sections with intensity transmission ``tau`` and
    reflection ``rho`` the cascade transmission is ``sin(phi)/sin(n theta + phi)``
    with ``cos(theta) = (1 + tau^2 - rho^2)/(2 tau)``. The returned value
    ``n theta + phi`` reaches ``pi`` exactly at the threshold of the cascade,
    so it plays the role of ``s``. Absorbing cascades (``gain < 1``) return
    the negative of the hyperbolic continuation.
    """
    tau = (1 - reflectance) * gain
    rho = reflectance * gain
    c = (1 + tau * tau - rho * rho) / (2 * tau)
    if c <= 1.0:
        theta = math.acos(c)
        return n_slices * theta + math.atan2(math.sin(theta), 1 / tau - c)
    kappa = math.acosh(c)
    return -(n_slices * kappa + math.atanh(math.sinh(kappa) / (1 / tau - c)))


def calibrate_waveguide(spec: WaveguideSpec) -> tuple[float, float]:
    """Per-slice reflectance ``R`` and intensity gain ``lam^2`` for ``spec``."""
    n = spec.n_slices
    delta = spec.length / n
    R = delta / (spec.backscatter_length + delta)
    s = spec.s
    if s == 0.0:
        return R, 1.0
    target = s if spec.regime == "amplifying" else -s

    def mismatch(log_gain):
        return flux_threshold_phase(math.exp(log_gain), R, n) - target

    # grow the bracket from zero so it never crosses the phase wrap at pi
    edge = 1e-6 if target > 0 else -1e-6
    while (mismatch(edge) < 0) == (target > 0):
        edge *= 1.5
    lo, hi = (0.0, edge) if target > 0 else (edge, 0.0)
    log_gain = brentq(mismatch, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps)
    return R, math.exp(log_gain)


def _waveguide_slice(n: int, R: float, lam: float, rng) -> ScatteringMatrix:
    u1 = haar_unitary(n, rng)
    u2 = haar_unitary(n, rng)
    rs = 1j * math.sqrt(R)
    ts = math.sqrt(1 - R)
    t = ts * (u2 @ u1.T)
    s = lam * np.block([[rs * (u1 @ u1.T), t.T], [t, rs * (u2 @ u2.T)]])
    return ScatteringMatrix(s, "unitary" if lam == 1.0 else ("amplifying" if lam > 1 else "absorbing"))


def sample_waveguide(spec: WaveguideSpec, seed) -> ScatteringMatrix:
    """One disordered-waveguide scattering matrix.

    Raises
    ------
    ThresholdCrossed
        If multiple reflections between slices diverge (the sample lases).
    """
    seed = _as_seed(seed)
    n = spec.n_modes
    if spec.length == 0:
        return identity_transmission(n, spec.regime)
    R, gain = calibrate_waveguide(spec)
    lam = math.sqrt(gain)
    rng = generator(seed)
    acc = _waveguide_slice(n, R, lam, rng)
    for _ in range(spec.n_slices - 1):
        acc = star_compose(acc, _waveguide_slice(n, R, lam, rng))
    out = ScatteringMatrix(acc.s, spec.regime)
    out.validate()
    return out


# --------------------------------------------------------------- cavity


def _goe(m: int, scale: float, rng) -> np.ndarray:
    a = rng.standard_normal((m, m))
    return (a + a.T) * (scale / math.sqrt(2 * m))


def sample_cavity_sweep(
    spec: CavitySpec, gammas: Sequence[float], seed
) -> list[ScatteringMatrix | ThresholdCrossed]:
    """Cavity matrices for several rates ``gamma`` sharing one Hamiltonian.

    Entry ``k`` equals ``sample_cavity(replace(spec, gamma=gammas[k]), seed)``;
    samples that lase come back as :class:`ThresholdCrossed` instances
    instead of being raised, so one bad rate does not lose the others.
    """
    seed = _as_seed(seed)
    n, m = spec.n_modes, spec.n_levels
    lam = m * spec.level_spacing / math.pi
    w = math.sqrt(lam / math.pi)
    rng = generator(seed)
    h = _goe(m, lam, rng)
    energies, vecs = np.linalg.eigh(h)
    wt = w * vecs[:n, :]  # W^T O, shape N x M

    poles = None
    out = []
    for g in gammas:
        sub = CavitySpec(**{**asdict(spec), "gamma": float(g)})
        eta = sub.eta
        if eta > 0:
            if poles is None:
                heff = h.astype(np.complex128)
                heff[np.arange(n), np.arange(n)] -= 1j * math.pi * w * w
                z = np.linalg.eigvals(heff)
                poles = z[np.abs(z.real) < spec.pole_window * 2 * lam]
            top = poles.imag.max() + eta if poles.size else -math.inf
            if top >= 0:
                out.append(ThresholdCrossed(f"cavity pole at Im z = {top:.3e} >= 0 (gamma={g})"))
                continue
        green = 1.0 / (0.0 - energies - 1j * eta)
        k = math.pi * (wt * green) @ wt.T
        one = np.eye(n)
        r = np.linalg.solve(one + 1j * k, one - 1j * k)
        r = 0.5 * (r + r.T)
        zero = np.zeros((n, n))
        sm = ScatteringMatrix.from_blocks(r, zero, zero, one, sub.regime)
        try:
            sm.validate()
        except InvariantViolation as exc:
            out.append(exc)
            continue
        out.append(sm)
    return out


def sample_cavity(spec: CavitySpec, seed) -> ScatteringMatrix:
    """Reflection matrix of the cavity, embedded in a ``2N x 2N`` matrix.

    The cavity reflection sits in the left block ``r'``; ``t = t' = 0`` and
    the right block is a perfect mirror, so reflection-side formulas apply.
    """
    (res,) = sample_cavity_sweep(spec, [spec.gamma], seed)
    if isinstance(res, Exception):
        raise res
    return res


# ---------------------------------------------------------- single pole


def sample_pole_matrix(spec: PoleSpec, omega: float | None = None) -> ScatteringMatrix:
    """Rank-one resonant scattering matrix ``sigma sigma^T / denominator``.

    The result is not checked against the amplifying invariant: the pure
    pole term is the near-threshold asymptote of ``S``, not a full matrix.
    """
    if omega is None:
        omega = spec.resonance
    sigma = np.asarray(spec.couplings, dtype=np.complex128)
    denom = omega - spec.resonance + 0.5j * spec.decay - 0.5j * spec.amp_rate
    if abs(denom) < POLE_GUARD * spec.sigma_total:
        raise ThresholdCrossed(f"pole denominator {abs(denom):.3e} is numerically zero")
    block = np.outer(sigma, sigma) / denom
    block = np.triu(block) + np.triu(block, 1).T  # exactly symmetric
    if spec.geometry == "cavity":
        n = sigma.size
        s = np.zeros((2 * n, 2 * n), dtype=np.complex128)
        s[:n, :n] = block
        return ScatteringMatrix(s, "amplifying")
    return ScatteringMatrix(block, "amplifying")


def sample_haar_coupling(n: int, seed) -> np.ndarray:
    """Unit vector with rotation-invariant distribution in ``C^n``."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    rng = generator(_as_seed(seed))
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return z / np.linalg.norm(z)


def haar_coupling_batch(n: int, n_samples: int, seed) -> np.ndarray:
    """``n_samples`` independent unit vectors, one per row, from one stream."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    rng = generator(_as_seed(seed))
    z = rng.standard_normal((n_samples, n)) + 1j * rng.standard_normal((n_samples, n))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


# ------------------------------------------------------------- ensemble


def sample_medium(spec, seed) -> ScatteringMatrix:
    if isinstance(spec, WaveguideSpec):
        return sample_waveguide(spec, seed)
    if isinstance(spec, CavitySpec):
        return sample_cavity(spec, seed)
    if isinstance(spec, PoleSpec):
        return sample_pole_matrix(spec)
    raise TypeError(f"not a medium spec: {type(spec).__name__}")


@dataclass
class EnsembleResult:
    """Per-sample statistics of an ensemble plus provenance.

    ``values[key]`` holds one entry per accepted sample, in sample-index order.
    """

    spec: dict
    spec_hash: str
    base_seed: int
    n_requested: int
    n_rejected: int = 0
    values: dict = field(default_factory=dict)
    rejected_indices: list = field(default_factory=list)

    @property
    def n_accepted(self) -> int:
        return self.n_requested - self.n_rejected

    def mean(self, key):
        return np.mean(self.values[key], axis=0)

    def var(self, key):
        return np.var(self.values[key], axis=0, ddof=1)

    def stderr(self, key):
        v = np.asarray(self.values[key])
        if len(v) < 2:
            return np.full(v.shape[1:], np.nan)
        return np.std(v, axis=0, ddof=1) / math.sqrt(len(v))

    def histogram(self, key, bins=50, range=None):
        return np.histogram(self.values[key], bins=bins, range=range)

    def summary(self) -> dict:
        return {
            "spec": self.spec,
            "spec_hash": self.spec_hash,
            "base_seed": self.base_seed,
            "n_requested": self.n_requested,
            "n_rejected": self.n_rejected,
            "mean": {k: np.asarray(self.mean(k)).tolist() for k in self.values},
            "stderr": {k: np.asarray(self.stderr(k)).tolist() for k in self.values},
        }


def _one_sample(args):
    spec, base_seed, index, statistic = args
    try:
        sm = sample_medium(spec, RngSeed(base_seed, index))
    except (ThresholdCrossed, InvariantViolation):
        return index, None
    return index, statistic(sm)


def run_ensemble(
    spec,
    n_samples: int,
    base_seed: int,
    statistic: Callable[[ScatteringMatrix], dict],
    workers: int = 1,
) -> EnsembleResult:
    """Draw ``n_samples`` matrices and reduce each with ``statistic``.

    ``statistic`` maps a matrix to a dict of numbers (or arrays). Samples
    that lase or fail the regime check are counted in ``n_rejected``. The
    result does not depend on ``workers``: sample ``i`` always uses the
    stream ``(base_seed, i)`` and results are stored in index order.
    With ``workers > 1``, ``statistic`` must be picklable.
    """
    if n_samples < 0:
        raise ValueError("n_samples must be >= 0")
    jobs = [(spec, base_seed, i, statistic) for i in range(n_samples)]
    if workers > 1 and n_samples > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one_sample, jobs, chunksize=max(1, n_samples // (4 * workers))))
    else:
        results = [_one_sample(j) for j in jobs]
    res = EnsembleResult(spec_to_dict(spec), spec_hash(spec), base_seed, n_samples)
    for index, stat in results:
        if stat is None:
            res.n_rejected += 1
            res.rejected_indices.append(index)
            continue
        for k, v in stat.items():
            res.values.setdefault(k, []).append(v)
    res.values = {k: np.asarray(v) for k, v in res.values.items()}
    return res


def run_cavity_sweep(
    spec: CavitySpec,
    gammas: Sequence[float],
    n_samples: int,
    base_seed: int,
    statistic: Callable[[ScatteringMatrix], dict],
) -> list[EnsembleResult]:
    """One :class:`EnsembleResult` per rate, all drawn from shared Hamiltonians."""
    subs = [CavitySpec(**{**asdict(spec), "gamma": float(g)}) for g in gammas]
    results = [EnsembleResult(spec_to_dict(s), spec_hash(s), base_seed, n_samples) for s in subs]
    for i in range(n_samples):
        mats = sample_cavity_sweep(spec, gammas, RngSeed(base_seed, i))
        for res, sm in zip(results, mats):
            if isinstance(sm, ExcessNoiseError):
                res.n_rejected += 1
                res.rejected_indices.append(i)
                continue
            for k, v in statistic(sm).items():
                res.values.setdefault(k, []).append(v)
    for res in results:
        res.values = {k: np.asarray(v) for k, v in res.values.items()}
    return results
