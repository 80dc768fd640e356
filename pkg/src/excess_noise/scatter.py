"""Scattering matrices of two-sided multimode media.

Block layout (used everywhere in the package)::

    S = [[r', t'],
         [t,  r ]]

Modes ``0..N-1`` are on the left of the medium and ``N..2N-1`` on the right,
so ``r'`` is left-side reflection (top-left), ``t`` carries left to right
(bottom-left) and ``r`` is right-side reflection (bottom-right).

Matrices are plain ``complex128`` numpy arrays; :class:`ScatteringMatrix`
wraps one together with its gain/loss regime and freezes the buffer.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    InvariantViolation,
    NumericalConsistencyError,
    StructuralError,
    ThresholdCrossed,
)

REGIMES = ("amplifying", "absorbing", "unitary")
SIDES = ("transmission", "reflection")

RECIPROCITY_RTOL = 1e-10
PSD_RTOL = 1e-10
UNITARY_ATOL = 1e-10
MAX_RESOLVENT_COND = 1e12


def _as_matrix(a, name="matrix") -> np.ndarray:
    m = np.array(a, dtype=np.complex128, copy=True)
    if m.ndim != 2:
        raise StructuralError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise StructuralError(f"{name} has non-finite entries")
    return m


@dataclass(frozen=True, eq=False)
class ScatteringMatrix:
    """A ``2N x 2N`` scattering matrix and the regime it claims to be in.

    Construction only checks structure (square, even size, finite). Physical
    invariants are checked by :meth:`validate`, which generators call before
    handing a matrix out.
    """

    s: np.ndarray
    regime: str = "unitary"

    def __post_init__(self):
        m = _as_matrix(self.s, "scattering matrix")
        if m.shape[0] != m.shape[1] or m.shape[0] % 2 or m.shape[0] == 0:
            raise StructuralError(f"scattering matrix must be 2N x 2N, got {m.shape}")
        if self.regime not in REGIMES:
            raise StructuralError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        m.flags.writeable = False
        object.__setattr__(self, "s", m)

    @property
    def n_modes(self) -> int:
        return self.s.shape[0] // 2

    @property
    def r_prime(self) -> np.ndarray:
        n = self.n_modes
        return self.s[:n, :n]

    @property
    def t_prime(self) -> np.ndarray:
        n = self.n_modes
        return self.s[:n, n:]

    @property
    def t(self) -> np.ndarray:
        n = self.n_modes
        return self.s[n:, :n]

    @property
    def r(self) -> np.ndarray:
        n = self.n_modes
        return self.s[n:, n:]

    @classmethod
    def from_blocks(cls, r_prime, t_prime, t, r, regime="unitary") -> "ScatteringMatrix":
        blocks_ = [_as_matrix(b) for b in (r_prime, t_prime, t, r)]
        n = blocks_[0].shape[0]
        if any(b.shape != (n, n) for b in blocks_):
            raise StructuralError(f"blocks must all be {n}x{n}: {[b.shape for b in blocks_]}")
        return cls(np.block([[blocks_[0], blocks_[1]], [blocks_[2], blocks_[3]]]), regime)

    def norm(self) -> float:
        return float(np.linalg.norm(self.s, 2))

    def validate(self, *, reciprocal: bool = True) -> "ScatteringMatrix":
        """Raise :class:`InvariantViolation` unless reciprocity and the regime hold."""
        if reciprocal:
            check_reciprocity(self)
        check_regime(self)
        return self

    def swapped(self) -> "ScatteringMatrix":
        """Mirror image: the left and right sides of the medium exchanged."""
        n = self.n_modes
        perm = np.r_[n : 2 * n, 0:n]
        return ScatteringMatrix(self.s[np.ix_(perm, perm)], self.regime)

    def to_dict(self) -> dict:
        return {
            "n_modes": self.n_modes,
            "regime": self.regime,
            "re": self.s.real.ravel().tolist(),
            "im": self.s.imag.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScatteringMatrix":
        try:
            n = int(data["n_modes"])
            re = np.asarray(data["re"], dtype=float)
            im = np.asarray(data["im"], dtype=float)
            regime = data.get("regime", "unitary")
        except (KeyError, TypeError, ValueError) as exc:
            raise StructuralError(f"bad scattering-matrix record: {exc}") from exc
        if re.size != 4 * n * n or im.size != 4 * n * n:
            raise StructuralError(
                f"expected {4 * n * n} entries for n_modes={n}, got re={re.size}, im={im.size}"
            )
        return cls((re + 1j * im).reshape(2 * n, 2 * n), regime)


def blocks(sm: ScatteringMatrix):
    """Return ``(r, t, r_prime, t_prime)`` as copies."""
    return sm.r.copy(), sm.t.copy(), sm.r_prime.copy(), sm.t_prime.copy()


def identity_transmission(n_modes: int, regime: str = "unitary") -> ScatteringMatrix:
    """Empty medium: every mode passes straight through, no reflection."""
    z = np.zeros((n_modes, n_modes))
    one = np.eye(n_modes)
    return ScatteringMatrix.from_blocks(z, one, one, z, regime)


def check_reciprocity(sm: ScatteringMatrix, rtol: float = RECIPROCITY_RTOL) -> None:
    scale = max(np.abs(sm.s).max(), 1.0)
    err = np.abs(sm.s - sm.s.T).max()
    if err > rtol * scale:
        raise InvariantViolation(f"S is not symmetric: max |S - S^T| = {err:.3e}")


def gain_spectrum(sm: ScatteringMatrix) -> np.ndarray:
    """Eigenvalues of the Hermitian matrix ``S S^dagger - 1`` (ascending)."""
    g = sm.s @ sm.s.conj().T
    g = 0.5 * (g + g.conj().T)
    return np.linalg.eigvalsh(g - np.eye(g.shape[0]))


def check_regime(sm: ScatteringMatrix) -> None:
    ev = gain_spectrum(sm)
    scale = max(sm.norm() ** 2, 1.0)
    if sm.regime == "amplifying" and ev[0] < -PSD_RTOL * scale:
        raise InvariantViolation(f"amplifying S has S S^+ - 1 with eigenvalue {ev[0]:.3e} < 0")
    if sm.regime == "absorbing" and ev[-1] > PSD_RTOL * scale:
        raise InvariantViolation(f"absorbing S has S S^+ - 1 with eigenvalue {ev[-1]:.3e} > 0")
    if sm.regime == "unitary" and np.abs(ev).max() > UNITARY_ATOL:
        raise InvariantViolation(f"S is not unitary: |S S^+ - 1| = {np.abs(ev).max():.3e}")


def deficit_matrix(sm: ScatteringMatrix, side: str = "transmission") -> np.ndarray:
    """Gain/loss deficit seen by the detector.

    ``1 - r r^+ - t t^+`` for detection in transmission and
    ``1 - r' r'^+ - t' t'^+`` for detection in reflection. Negative
    semidefinite for an amplifier, positive semidefinite for an absorber,
    zero for a unitary matrix.
    """
    if side not in SIDES:
        raise StructuralError(f"side must be one of {SIDES}, got {side!r}")
    n = sm.n_modes
    if sm.regime == "unitary":
        return np.zeros((n, n), dtype=np.complex128)
    rows = sm.s[n:, :] if side == "transmission" else sm.s[:n, :]
    d = np.eye(n) - rows @ rows.conj().T
    asym = np.abs(d - d.conj().T).max()
    if asym > 1e-10 * max(1.0, np.abs(d).max()):
        raise NumericalConsistencyError(f"deficit matrix not Hermitian (|D - D^+| = {asym:.3e})")
    return 0.5 * (d + d.conj().T)


def _combined_regime(a: str, b: str) -> str:
    if a == b:
        return a
    if "unitary" in (a, b):
        return b if a == "unitary" else a
    raise StructuralError(f"cannot compose a {a} section with a {b} section")


def star_compose(
    a: ScatteringMatrix,
    b: ScatteringMatrix,
    max_cond: float = MAX_RESOLVENT_COND,
) -> ScatteringMatrix:
    """Redheffer star product: section ``a`` on the left, ``b`` on the right.

    Multiple reflections between the sections are summed by the interior
    resolvent ``X = (1 - r_a r'_b)^{-1}``; the second resolvent is recovered
    from it by the push-through identity, so only one inverse is formed.

    Raises
    ------
    ThresholdCrossed
        If the interior resolvent is numerically singular (the cascade lases).
    """
    n = a.n_modes
    if b.n_modes != n:
        raise StructuralError(f"mode counts differ: {n} vs {b.n_modes}")
    regime = _combined_regime(a.regime, b.regime)
    rpa, tpa, ta, ra = a.r_prime, a.t_prime, a.t, a.r
    rpb, tpb, tb, rb = b.r_prime, b.t_prime, b.t, b.r

    inner = np.eye(n) - ra @ rpb
    try:
        x = np.linalg.inv(inner)
    except np.linalg.LinAlgError as exc:
        raise ThresholdCrossed("interior resolvent is singular") from exc
    cond = np.linalg.norm(inner, 1) * np.linalg.norm(x, 1)
    if not np.isfinite(cond) or cond > max_cond:
        raise ThresholdCrossed(f"interior resolvent condition number {cond:.3e} exceeds {max_cond:.0e}")

    tb_x = tb @ x
    rpb_x = rpb @ x
    t_c = tb_x @ ta
    r_c = rb + tb_x @ (ra @ tpb)
    rp_c = rpa + tpa @ (rpb_x @ ta)
    tp_c = tpa @ (tpb + rpb_x @ (ra @ tpb))
    return ScatteringMatrix(np.block([[rp_c, tp_c], [t_c, r_c]]), regime)


def dump_json(sm: ScatteringMatrix, path) -> None:
    Path(path).write_text(json.dumps(sm.to_dict()))


def load_json(path) -> ScatteringMatrix:
    return ScatteringMatrix.from_dict(json.loads(Path(path).read_text()))
