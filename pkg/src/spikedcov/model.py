"""
Observation model: data matrices, sample spectra and synthetic spiked data.

The model is ``X_i ~ N(0, Sigma)`` with mean zero, so the sample covariance
divides by ``n`` and never centers unless asked to.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .exceptions import DomainError, InputError, InvariantError, ParseError
from .linalg import _fix_signs

__all__ = [
    "DataMatrix",
    "SampleSpectrum",
    "SpikedScenario",
    "gauss_loglik",
    "gauss_loglik_rows",
    "gen_spiked_data",
    "load_matrix_csv",
    "sample_covariance",
]

LOG_2PI = math.log(2.0 * math.pi)


def _frozen(a) -> NDArray[np.float64]:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DataMatrix:
    """``n x p`` observations, one row per sample."""

    values: NDArray[np.float64]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise InputError("data must be a two-dimensional array")
        if v.shape[0] < 2 or v.shape[1] < 2:
            raise InputError(f"need n >= 2 and p >= 2, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InputError("data has non-finite entries")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def centered(self) -> "DataMatrix":
        return DataMatrix(self.values - self.values.mean(axis=0))


@dataclass(frozen=True)
class SampleSpectrum:
    """Spectrum of ``S = X^T X / n``.

    ``eigenvalues`` holds the ``min(n, p)`` leading eigenvalues; ``Q`` is a
    full ``p x p`` orthogonal matrix whose leading columns are the matching
    eigenvectors.
    """

    n: int
    p: int
    eigenvalues: NDArray[np.float64]
    Q: NDArray[np.float64]
    trace_S: float

    @property
    def rank_bound(self) -> int:
        return min(self.n, self.p)

    def w(self) -> NDArray[np.float64]:
        """Diagonal of ``W`` in ``nS = Q W Q^T`` (length ``p``)."""
        out = np.zeros(self.p)
        out[: self.rank_bound] = self.n * self.eigenvalues
        return out

    @classmethod
    def from_eigenvalues(cls, eigenvalues, n: int, p: int | None = None) -> "SampleSpectrum":
        """Spectrum with the identity as eigenbasis, for synthetic spectra."""
        lam = np.sort(np.asarray(eigenvalues, dtype=np.float64))[::-1]
        p = len(lam) if p is None else p
        if len(lam) != min(n, p):
            raise InputError(f"expected {min(n, p)} eigenvalues, got {len(lam)}")
        return cls(n, p, _frozen(lam), _frozen(np.eye(p)), float(lam.sum()))


@dataclass(frozen=True)
class SpikedScenario:
    """``N(0, diag(spikes, base, ..., base))`` with ``n`` rows of dimension ``p``."""

    n: int
    p: int
    spikes: tuple[float, ...] = field(default=())
    base: float = 1.0

    def __post_init__(self):
        spikes = tuple(float(s) for s in self.spikes)
        object.__setattr__(self, "spikes", spikes)
        if self.n < 2 or self.p < 2:
            raise InputError("need n >= 2 and p >= 2")
        if self.base <= 0:
            raise InputError("base eigenvalue must be positive")
        if any(b >= a for a, b in zip(spikes, spikes[1:])):
            raise InputError("spikes must be strictly descending")
        if spikes and spikes[-1] <= self.base:
            raise InputError("spikes must exceed the base level")
        if len(spikes) >= min(self.n, self.p):
            raise InputError("spike count must be below min(n, p)")

    @property
    def k(self) -> int:
        return len(self.spikes)

    def true_eigenvalues(self) -> NDArray[np.float64]:
        lam = np.full(self.p, self.base)
        lam[: self.k] = self.spikes
        return lam

    def true_eigenvectors(self) -> NDArray[np.float64]:
        """Leading ``k`` true eigenvectors (standard basis)."""
        return np.eye(self.p)[:, : self.k]

    def to_dict(self) -> dict:
        return {"n": self.n, "p": self.p, "spikes": list(self.spikes), "base": self.base}


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_matrix_csv(path, center: bool = False) -> DataMatrix:
    """Read a comma-separated numeric matrix, rows being observations.

    A first row containing any non-numeric cell is treated as a header.
    Set ``center`` to subtract column means; this changes the model from
    mean-zero data to data with an estimated mean.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"{path}: file is empty")
    start = 0
    if not all(_is_number(c) for c in rows[0]):
        start = 1
    width = None
    data = []
    for lineno, row in enumerate(rows[start:], start=start + 1):
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"{path}: row {lineno} has {len(row)} columns, expected {width}")
        vals = []
        for col, cell in enumerate(row, start=1):
            try:
                vals.append(float(cell))
            except ValueError:
                raise ParseError(
                    f"{path}: non-numeric cell {cell!r} at row {lineno}, column {col}"
                ) from None
        data.append(vals)
    if len(data) < 2:
        raise ParseError(f"{path}: need at least 2 data rows, found {len(data)}")
    try:
        x = DataMatrix(np.array(data))
    except InputError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return x.centered() if center else x


def _complete_basis(v: NDArray[np.float64], p: int, tol: float = 1e-6) -> NDArray[np.float64]:
    """Extend orthonormal columns ``v`` to a ``p x p`` orthogonal matrix.

    Standard basis vectors are orthogonalized against the current basis in
    index order (two Gram-Schmidt passes) and kept when their residual norm
    exceeds ``tol``.
    """
    r = v.shape[1]
    q = np.zeros((p, p))
    q[:, :r] = v
    m = r
    for i in range(p):
        if m == p:
            break
        e = np.zeros(p)
        e[i] = 1.0
        basis = q[:, :m]
        for _ in range(2):
            e -= basis @ (basis.T @ e)
        norm = np.linalg.norm(e)
        if norm > tol:
            q[:, m] = e / norm
            m += 1
    if m < p:
        raise InvariantError(f"basis completion stalled at {m} of {p} columns")
    return q


def sample_covariance(x: DataMatrix) -> SampleSpectrum:
    """Spectrum of ``S = X^T X / n``.

    For ``p > n`` the ``n x n`` Gram matrix ``X X^T / n`` is decomposed instead
    and each eigenvector lifted with ``v = X^T u / ||X^T u||``; the remaining
    columns of ``Q`` complete an orthonormal basis.
    """
    if not isinstance(x, DataMatrix):
        x = DataMatrix(x)
    xv = x.values
    n, p = xv.shape
    r = min(n, p)
    trace = float(np.sum(xv * xv) / n)
    if p <= n:
        w, v = np.linalg.eigh(xv.T @ xv / n)
        order = np.argsort(-w, kind="stable")
        lam = np.maximum(w[order], 0.0)
        q = _fix_signs(v[:, order])
        return SampleSpectrum(n, p, _frozen(lam), _frozen(q), trace)

    w, u = np.linalg.eigh(xv @ xv.T / n)
    order = np.argsort(-w, kind="stable")
    lam = np.maximum(w[order], 0.0)
    lifted = xv.T @ u[:, order]
    norms = np.linalg.norm(lifted, axis=0)
    # eigenvalue n*lam equals ||X^T u||^2; zero-variance directions cannot be lifted
    keep = norms > 1e-10 * max(float(norms.max(initial=0.0)), 1e-300)
    good = int(np.sum(np.cumprod(keep)))
    vecs = _fix_signs(lifted[:, :good] / norms[:good])
    lam[good:] = 0.0
    q = _complete_basis(vecs, p)
    return SampleSpectrum(n, p, _frozen(lam[:r]), _frozen(q), trace)


def gen_spiked_data(sc: SpikedScenario, rng: np.random.Generator) -> DataMatrix:
    """``n`` iid rows from ``N(0, diag(spikes, base, ..., base))``."""
    z = rng.standard_normal((sc.n, sc.p))
    return DataMatrix(z * np.sqrt(sc.true_eigenvalues()))


def gauss_loglik(x, lam, u) -> float:
    """Log density of ``x`` under ``N(0, U diag(lam) U^T)``."""
    lam = np.asarray(lam, dtype=np.float64)
    if np.any(lam <= 0):
        raise DomainError("eigenvalues must be positive")
    z = np.asarray(u, dtype=np.float64).T @ np.asarray(x, dtype=np.float64)
    return float(-0.5 * (len(lam) * LOG_2PI + np.sum(np.log(lam)) + np.sum(z * z / lam)))


def gauss_loglik_rows(xu: NDArray[np.float64], lam: NDArray[np.float64]) -> NDArray[np.float64]:
    """Per-row log densities given the rotated data ``X U`` (rows = observations)."""
    p = xu.shape[1]
    const = p * LOG_2PI + np.sum(np.log(lam))
    return -0.5 * (const + (xu * xu) @ (1.0 / lam))
