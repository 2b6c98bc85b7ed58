"""
Point estimates and intervals for spiked eigenvalues and eigenvectors.

Bayesian summaries come from :class:`~spikedcov.sampler.PosteriorDraws`;
the frequentist comparators are the raw sample eigenpairs and the S-POET
shrinkage eigenvalues with their asymptotic normal intervals.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import stats

from .exceptions import ConfigError, DegeneratePosteriorError, DomainError, InputError
from .model import DataMatrix, SampleSpectrum
from .sampler import PosteriorDraws

__all__ = [
    "EigenSummary",
    "ReductionResult",
    "SpoetEstimate",
    "batch_means_se",
    "cumulative_explained_variance",
    "estimate_eigenvectors",
    "reduce_reconstruct",
    "spoet",
    "spoet_eigenvalues",
    "spoet_interval",
    "summarize_eigenvalues",
]


@dataclass(frozen=True)
class EigenSummary:
    index: int
    point: float
    lo: float
    hi: float

    @property
    def interval_length(self) -> float:
        return self.hi - self.lo

    def to_dict(self) -> dict:
        d = asdict(self)
        d["il"] = self.interval_length
        return d


@dataclass(frozen=True)
class SpoetEstimate:
    values: NDArray[np.float64]
    intervals: NDArray[np.float64]
    level: float


def summarize_eigenvalues(d: PosteriorDraws, k: int, level: float = 0.95) -> list[EigenSummary]:
    """Posterior mean and equal-tailed interval for each of the ``k`` largest eigenvalues."""
    lam = d.sorted_lambda
    if lam.shape[0] == 0:
        raise DegeneratePosteriorError("no posterior draws")
    tail = 0.5 * (1.0 - level)
    out = []
    for i in range(k):
        col = lam[:, i]
        lo, hi = np.quantile(col, [tail, 1.0 - tail])
        out.append(EigenSummary(i + 1, float(col.mean()), float(lo), float(hi)))
    return out


def estimate_eigenvectors(d: PosteriorDraws, reference: NDArray[np.float64]) -> NDArray[np.float64]:
    """Sign-aligned Euclidean mean of the stored eigenvectors, normalized.

    Each draw's ``i``-th vector is flipped to have a nonnegative inner
    product with ``reference[:, i]`` before averaging.
    """
    vecs = d.top_vectors
    ref = np.asarray(reference, dtype=np.float64)
    if ref.ndim == 1:
        ref = ref[:, None]
    k = min(vecs.shape[2], ref.shape[1])
    out = np.empty((vecs.shape[1], k))
    for i in range(k):
        v = vecs[:, :, i]
        signs = np.where(v @ ref[:, i] < 0, -1.0, 1.0)
        mean = (v * signs[:, None]).mean(axis=0)
        norm = np.linalg.norm(mean)
        if norm < 1e-12:
            raise DegeneratePosteriorError(f"aligned mean of eigenvector {i + 1} vanishes")
        out[:, i] = mean / norm
    return out


def spoet_eigenvalues(ss: SampleSpectrum, k: int) -> NDArray[np.float64]:
    """Shrinkage eigenvalues ``lam_j - p / (np - nk - pk) * (tr S - sum_{i<=k} lam_i)``."""
    n, p = ss.n, ss.p
    denom = n * p - n * k - p * k
    if denom <= 0:
        raise ConfigError(f"k = {k} too large for n = {n}, p = {p}")
    lam = ss.eigenvalues[:k]
    resid = max(ss.trace_S - float(lam.sum()), 0.0)
    return lam - p / denom * resid


def spoet_interval(value: float, n: int, level: float = 0.95) -> tuple[float, float]:
    """Interval from ``sqrt(n) (lam_hat / lam - 1) -> N(0, 2)`` inverted for ``lam``."""
    z = stats.norm.ppf(0.5 + 0.5 * level)
    half = z * np.sqrt(2.0 / n)
    if not half < 1.0:
        raise DomainError(f"n = {n} too small for a {level:.0%} interval")
    return value / (1.0 + half), value / (1.0 - half)


def spoet(ss: SampleSpectrum, k: int, level: float = 0.95) -> SpoetEstimate:
    vals = spoet_eigenvalues(ss, k)
    iv = np.array([spoet_interval(v, ss.n, level) for v in vals]).reshape(k, 2)
    return SpoetEstimate(vals, iv, level)


def cumulative_explained_variance(ss: SampleSpectrum, k: int) -> float:
    lam = ss.eigenvalues
    return float(lam[:k].sum() / lam.sum())


@dataclass(frozen=True)
class ReductionResult:
    x_hat: NDArray[np.float64]
    nmse: float
    cve: float | None


def reduce_reconstruct(
    x: DataMatrix, u1: NDArray[np.float64], ss: SampleSpectrum | None = None
) -> ReductionResult:
    """Project the rows of ``x`` onto the span of ``u1`` and score the fit.

    NMSE is the mean squared reconstruction error divided by the squared
    range of ``x``; CVE (needs ``ss``) is the share of the sample trace in
    the leading ``k = u1.shape[1]`` eigenvalues.
    """
    xv = x.values if isinstance(x, DataMatrix) else np.asarray(x, dtype=np.float64)
    u1 = np.asarray(u1, dtype=np.float64).reshape(xv.shape[1], -1)
    k = u1.shape[1]
    if np.linalg.norm(u1.T @ u1 - np.eye(k)) > 1e-8:
        raise InputError("projection basis is not orthonormal")
    rng_ = float(xv.max() - xv.min())
    if rng_ == 0.0:
        raise InputError("data are constant; NMSE undefined")
    x_hat = (xv @ u1) @ u1.T
    nmse = float(np.mean((xv - x_hat) ** 2) / rng_**2)
    cve = cumulative_explained_variance(ss, k) if ss is not None else None
    return ReductionResult(x_hat, nmse, cve)


def batch_means_se(x: NDArray[np.float64], n_batches: int = 25) -> float:
    """Monte-Carlo standard error of the mean of a correlated series by batch means."""
    x = np.asarray(x, dtype=np.float64)
    size = x.size // n_batches
    if size < 1:
        raise InputError("series shorter than the number of batches")
    means = x[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(n_batches))
