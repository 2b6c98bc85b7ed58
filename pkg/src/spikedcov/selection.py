"""
Choosing the number of spikes ``k``.

Three criteria: WAIC of the gSIW posterior (one chain per candidate ``k``),
the growth ratio of consecutive sample eigenvalues, and the ``IC_p3``
factor-model criterion on the residual of the top-``k`` projection.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.special import logsumexp

from .exceptions import ConfigError, InputError
from .model import DataMatrix, SampleSpectrum, sample_covariance
from .prior import gsiw_data_driven
from .sampler import McmcSettings, run_chain

__all__ = [
    "SelectionResult",
    "default_kmax",
    "growth_ratio",
    "ic_p3",
    "select_k",
    "waic",
]

log = logging.getLogger(__name__)

RESIDUAL_FLOOR = 1e-30


@dataclass(frozen=True)
class SelectionResult:
    criterion: str
    scores: NDArray[np.float64]
    chosen_k: int
    details: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {"criterion": self.criterion, "scores": self.scores.tolist(), "chosen_k": self.chosen_k}


def waic(loglik: NDArray[np.float64]) -> float:
    """WAIC from a ``draws x n`` matrix of pointwise log-likelihoods.

    Uses the variance form of the effective number of parameters:
    ``-2 * lppd + 2 * sum_i Var_draws[loglik[:, i]]``.
    """
    ll = np.asarray(loglik, dtype=np.float64)
    if ll.ndim != 2 or ll.shape[0] < 2:
        raise InputError("WAIC needs at least two draws")
    s = ll.shape[0]
    lppd = float(np.sum(logsumexp(ll, axis=0) - np.log(s)))
    p_waic = float(np.sum(np.var(ll, axis=0, ddof=1)))
    return -2.0 * lppd + 2.0 * p_waic


def _eigenvalues(ss) -> NDArray[np.float64]:
    if isinstance(ss, SampleSpectrum):
        return ss.eigenvalues
    return np.sort(np.asarray(ss, dtype=np.float64))[::-1]


def growth_ratio(ss, k: int) -> float:
    """``log(1 + lam_k / V(k)) / log(1 + lam_{k+1} / V(k+1))`` with ``V(k) = sum_{j>k} lam_j``.

    ``ss`` may be a SampleSpectrum or a plain vector of sample eigenvalues.
    """
    lam = _eigenvalues(ss)
    r = lam.size
    if not 1 <= k <= r - 2:
        raise ConfigError(f"k must lie in [1, {r - 2}], got {k}")
    v_k = lam[k:].sum()
    v_k1 = lam[k + 1 :].sum()
    if v_k1 <= 0:
        raise ConfigError(f"residual sum V({k + 1}) is zero")
    return float(np.log1p(lam[k - 1] / v_k) / np.log1p(lam[k] / v_k1))


def ic_p3(x: DataMatrix, u1: NDArray[np.float64]) -> float:
    """``log(||X - X U1 U1^T||_F^2 / (np)) + k log(min(n,p)) / min(n,p)``."""
    xv = x.values if isinstance(x, DataMatrix) else np.asarray(x, dtype=np.float64)
    n, p = xv.shape
    u1 = np.asarray(u1, dtype=np.float64)
    u1 = np.zeros((p, 0)) if u1.size == 0 else u1.reshape(p, -1)
    k = u1.shape[1]
    resid = xv - (xv @ u1) @ u1.T
    v = max(float(np.sum(resid * resid)) / (n * p), RESIDUAL_FLOOR)
    m = min(n, p)
    return float(np.log(v) + k * np.log(m) / m)


def default_kmax(n: int, p: int) -> int:
    return max(1, min(n, p) // 2)


def select_k(
    x: DataMatrix,
    method: str = "waic",
    k_max: int | None = None,
    settings: McmcSettings | None = None,
    ss: SampleSpectrum | None = None,
    threads: int = 1,
) -> SelectionResult:
    """Score ``k = 1 .. k_max`` with one criterion and pick the best.

    WAIC and ``IC_p3`` are minimized, the growth ratio maximized. WAIC runs
    one gSIW chain per candidate with seed ``settings.seed + k``; ``threads``
    runs those chains concurrently without changing the scores.
    """
    ss = ss or sample_covariance(x)
    r = ss.rank_bound
    k_max = default_kmax(ss.n, ss.p) if k_max is None else k_max
    if not 1 <= k_max <= r - 2:
        raise ConfigError(f"k_max must lie in [1, {r - 2}], got {k_max}")
    ks = range(1, k_max + 1)
    method = method.lower().replace("_", "")
    if method == "gr":
        scores = np.array([growth_ratio(ss, k) for k in ks])
        chosen = int(np.argmax(scores)) + 1
        return SelectionResult("gr", scores, chosen)
    if method in ("icp3", "ic"):
        scores = np.array([ic_p3(x, ss.Q[:, :k]) for k in ks])
        chosen = int(np.argmin(scores)) + 1
        return SelectionResult("icp3", scores, chosen)
    if method == "waic":
        base = settings or McmcSettings()

        def score(k):
            ms = McmcSettings(
                base.burn_in, base.draws, base.thin, base.reorth_every, base.seed + k, base.pair_schedule
            )
            draws = run_chain(ss, gsiw_data_driven(ss, k), ms, x=x, k=0)
            w = waic(draws.loglik)
            log.debug("WAIC(k=%d) = %.4f", k, w)
            return w

        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                scores = np.array(list(pool.map(score, ks)))
        else:
            scores = np.array([score(k) for k in ks])
        chosen = int(np.argmin(scores)) + 1
        return SelectionResult("waic", scores, chosen)
    raise ConfigError(f"unknown criterion {method!r}")
