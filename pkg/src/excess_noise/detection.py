"""Photodetection settings shared by the closed-form and Monte Carlo paths."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass

from .scatter import SIDES


@dataclass(frozen=True)
class DetectionConfig:
    """How the outgoing light is detected.

    Parameters
    ----------
    alpha : float
        Detector efficiency, in (0, 1].
    f : float
        Bose-Einstein occupation of the medium at the signal frequency.
        Negative for an inverted (amplifying) medium, with ``f = -1`` at
        complete inversion; positive for an absorber in equilibrium.
    m0 : int
        Zero-based index of the illuminated mode on the left of the medium.
    I0 : float
        Incident photocurrent (photons per unit time).
    tau : float
        Counting time.
    side : {"transmission", "reflection"}
        Where the detector sits.
    """

    alpha: float = 1.0
    f: float = -1.0
    m0: int = 0
    I0: float = 1.0
    tau: float = 1.0
    side: str = "transmission"

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not math.isfinite(self.f):
            raise ValueError(f"f must be finite, got {self.f}")
        if self.m0 < 0:
            raise ValueError(f"m0 must be >= 0, got {self.m0}")
        if not (self.I0 >= 0.0 and math.isfinite(self.I0)):
            raise ValueError(f"I0 must be finite and >= 0, got {self.I0}")
        if not self.tau > 0.0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {self.side!r}")

    def replace(self, **changes) -> "DetectionConfig":
        return DetectionConfig(**{**asdict(self), **changes})

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def bose_einstein(hbar_omega: float, kT: float) -> float:
    """Occupation ``1/(exp(hbar*omega/kT) - 1)``; pass ``kT < 0`` for inversion.

    For ``kT -> 0-`` this tends to -1 (complete inversion); any finite
    negative temperature gives ``f < -1``.
    """
    if kT == 0.0:
        raise ValueError("kT must be nonzero; use f=-1 directly for complete inversion")
    x = hbar_omega / kT
    if x > 700:
        return math.exp(-x)  # expm1 overflows; the occupation is exponentially small
    return 1.0 / math.expm1(x)
