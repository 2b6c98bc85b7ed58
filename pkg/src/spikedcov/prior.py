"""
Prior configurations for the generalized shrinkage inverse-Wishart family.

A configuration holds one shape exponent per eigen-coordinate, the repulsion
exponent ``b`` and the scale ``h`` of ``H = h I``. ``b = 1`` gives the
shrinkage variants (gSIW, SIW); ``b = 0`` the plain inverse-Wishart variants
(gIW, IW).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .exceptions import ConfigError
from .model import SampleSpectrum, SpikedScenario

__all__ = [
    "PriorConfig",
    "giw_data_driven",
    "gsiw_data_driven",
    "iw_fixed",
    "nonspiked_mean",
    "prior_for",
    "siw_fixed",
    "validate_assumptions",
]


@dataclass(frozen=True)
class PriorConfig:
    a: NDArray[np.float64]
    b: int
    h: float
    k: int = 0
    name: str = ""

    def __post_init__(self):
        a = np.array(self.a, dtype=np.float64, copy=True)
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        if a.ndim != 1 or a.size < 1:
            raise ConfigError("shape vector must be one-dimensional and nonempty")
        if not np.all(a > 2):
            i = int(np.argmin(a > 2))
            raise ConfigError(f"shape a[{i + 1}] = {a[i]:.6g} must exceed 2")
        if np.any(np.diff(a) < 0):
            raise ConfigError("shape vector must be nondecreasing")
        if self.b not in (0, 1):
            raise ConfigError("repulsion exponent b must be 0 or 1")
        if not self.h > 0:
            raise ConfigError("scale h must be positive")
        if self.k < 0:
            raise ConfigError("spike count must be nonnegative")

    @property
    def p(self) -> int:
        return self.a.size

    def check_dims(self, n: int, p: int) -> None:
        if self.p != p:
            raise ConfigError(f"prior has dimension {self.p}, data has {p}")
        if self.k >= min(n, p):
            raise ConfigError(f"spike count {self.k} must be below min(n, p) = {min(n, p)}")

    def with_h(self, h: float) -> "PriorConfig":
        return PriorConfig(self.a, self.b, h, self.k, self.name)

    def to_dict(self) -> dict:
        return {"a": self.a.tolist(), "b": self.b, "h": self.h, "k": self.k, "name": self.name}

    @classmethod
    def from_dict(cls, d: dict) -> "PriorConfig":
        return cls(np.asarray(d["a"]), int(d["b"]), float(d["h"]), int(d.get("k", 0)), d.get("name", ""))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PriorConfig":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        if not isinstance(other, PriorConfig):
            return NotImplemented
        return (
            np.array_equal(self.a, other.a)
            and (self.b, self.h, self.k, self.name) == (other.b, other.h, other.k, other.name)
        )

    __hash__ = None


def nonspiked_mean(ss: SampleSpectrum, k: int) -> float:
    """Mean of the non-spiked sample eigenvalues ``lam_{k+1}, ..., lam_{min(n,p)}``."""
    r = ss.rank_bound
    if not 1 <= k < r:
        raise ConfigError(f"spike count must lie in [1, {r - 1}], got {k}")
    return float(np.mean(ss.eigenvalues[k:r]))


def _data_driven(ss: SampleSpectrum, k: int, b: int, name: str, h: float = 4.0) -> PriorConfig:
    n, p, r = ss.n, ss.p, ss.rank_bound
    t = nonspiked_mean(ss, k)
    lam = ss.eigenvalues
    for i in range(k):
        if not lam[i] > t:
            raise ConfigError(
                f"sample eigenvalue {i + 1} ({lam[i]:.6g}) does not exceed the "
                f"non-spiked mean {t:.6g}"
            )
    a = np.empty(p)
    a[:k] = n * t / (2.0 * (lam[:k] - t)) + 2.0
    bulk = max(p / 2.0, a[k - 1])
    a[k:r] = bulk
    a[r:] = max(2.0 * p, bulk)
    return PriorConfig(a, b, h, k, name)


def gsiw_data_driven(ss: SampleSpectrum, k: int) -> PriorConfig:
    """Data-driven gSIW prior (``b = 1``, ``H = 4I``).

    Spiked shapes solve ``2 a_i - 4 = n t / (lam_i - t)`` where ``t`` is the
    mean of the non-spiked sample eigenvalues. The bulk shape is ``p/2`` up
    to ``min(n, p)`` and ``2p`` beyond, both raised if needed to keep the
    vector nondecreasing.
    """
    return _data_driven(ss, k, 1, "gsiw")


def giw_data_driven(ss: SampleSpectrum, k: int) -> PriorConfig:
    """Same shapes as :func:`gsiw_data_driven` with ``b = 0``."""
    return _data_driven(ss, k, 0, "giw")


def siw_fixed(p: int, k: int = 0) -> PriorConfig:
    return PriorConfig(np.full(p, 4.0), 1, 4.0, k, "siw")


def iw_fixed(p: int, k: int = 0) -> PriorConfig:
    return PriorConfig(np.full(p, p + 1.0), 0, 1.0, k, "iw")


def prior_for(name: str, ss: SampleSpectrum, k: int) -> PriorConfig:
    """Build the named prior (``gsiw``, ``giw``, ``siw`` or ``iw``) for a spectrum."""
    name = name.lower()
    if name == "gsiw":
        return gsiw_data_driven(ss, k)
    if name == "giw":
        return giw_data_driven(ss, k)
    if name == "siw":
        return siw_fixed(ss.p, k)
    if name == "iw":
        return iw_fixed(ss.p, k)
    raise ConfigError(f"unknown prior {name!r}")


def validate_assumptions(
    sc: SpikedScenario,
    ratio_max: float = 0.5,
    gap_min: float = 0.1,
    d_max: float = 10.0,
) -> list[str]:
    """Warnings for a scenario that sits outside the regime the theory covers.

    Checks a small ``n/p`` ratio, relative gaps between consecutive leading
    eigenvalues (including the gap to the base level) and bounded
    ``d_j = p / (n lam_j)``. Returns messages, never raises.
    """
    out = []
    if sc.n / sc.p > ratio_max:
        out.append(f"A1: n/p = {sc.n / sc.p:.3g} is not small (threshold {ratio_max})")
    lam = list(sc.spikes) + [sc.base]
    for j in range(sc.k):
        gap = (lam[j] - lam[j + 1]) / lam[j]
        if gap < gap_min:
            out.append(f"A3: relative gap after eigenvalue {j + 1} is {gap:.3g} (< {gap_min})")
    for j, s in enumerate(sc.spikes):
        d = sc.p / (sc.n * s)
        if d > d_max:
            out.append(f"A4: d_{j + 1} = {d:.3g} exceeds {d_max}")
    return out
