"""
Gibbs sampler for the eigenstructure posterior under a gSIW-family prior.

With ``Gamma = Q^T U`` (``Q`` the sample eigenvectors) and ``W`` the scaled
sample eigenvalues, the posterior is proportional to::

    prod_i lam_i^(-a_i - n/2) etr(-1/2 Lam^-1 Gamma^T (hI + W) Gamma) * prod_{i<j} |lam_i - lam_j|^(1-b)

One sweep draws every eigenvalue given ``Gamma`` and then moves ``Gamma`` by
random signed Givens rotations of row pairs, each drawn from its exact
conditional.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from . import _kernels
from .exceptions import ConfigError, DomainError, InvariantError
from .linalg import ORTHO_TOL, orthogonality_defect, reorthonormalize
from .model import DataMatrix, SampleSpectrum, gauss_loglik_rows
from .prior import PriorConfig

__all__ = [
    "ChainState",
    "McmcSettings",
    "PosteriorDraws",
    "compute_c",
    "gibbs_sweep",
    "pair_schedule",
    "run_chain",
    "sample_lambda_step",
    "sample_pair_rotation",
    "sample_tilted_beta",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class McmcSettings:
    """Chain length and bookkeeping.

    ``draws`` counts post-burn-in sweeps; every ``thin``-th one is kept.
    ``pair_schedule`` is ``"full"`` (all row pairs in lexicographic order per
    sweep) or a positive integer ``m`` (``m`` uniformly chosen pairs).
    """

    burn_in: int = 500
    draws: int = 2000
    thin: int = 1
    reorth_every: int = 100
    seed: int = 0
    pair_schedule: str | int = "full"

    def __post_init__(self):
        if self.burn_in < 0:
            raise ConfigError("burn_in must be nonnegative")
        if self.draws <= 0:
            raise ConfigError("draws must be positive")
        if self.thin <= 0 or self.reorth_every <= 0:
            raise ConfigError("thin and reorth_every must be positive")
        if self.pair_schedule != "full":
            try:
                m = int(self.pair_schedule)
            except (TypeError, ValueError):
                raise ConfigError(f"bad pair schedule {self.pair_schedule!r}") from None
            if m <= 0:
                raise ConfigError("random-scan pair count must be positive")
            object.__setattr__(self, "pair_schedule", m)

    @property
    def scan_m(self) -> int:
        return 0 if self.pair_schedule == "full" else int(self.pair_schedule)

    @property
    def n_retained(self) -> int:
        return self.draws // self.thin


def pair_schedule(p: int, schedule: str | int = "full") -> list[tuple[int, int]] | int:
    """Lexicographic pair list for ``"full"``; the pair count for random scan."""
    if schedule == "full":
        return [(i, j) for i in range(p - 1) for j in range(i + 1, p)]
    return int(schedule)


def compute_c(gamma: NDArray[np.float64], ss: SampleSpectrum, h: float) -> NDArray[np.float64]:
    """Diagonal of ``Gamma^T (hI + W) Gamma``."""
    gamma = np.asarray(gamma, dtype=np.float64)
    return (gamma * gamma).T @ (h + ss.w())


@dataclass
class ChainState:
    """Mutable sampler state.

    ``gamma`` rows index sample eigen-directions and columns index the
    (unordered) eigenvalues ``lam``; ``c`` caches ``compute_c``.
    """

    gamma: NDArray[np.float64]
    lam: NDArray[np.float64]
    c: NDArray[np.float64]
    hvec: NDArray[np.float64]
    shape: NDArray[np.float64]
    b: int = 1

    @classmethod
    def initial(cls, ss: SampleSpectrum, cfg: PriorConfig) -> "ChainState":
        """``Gamma = I`` and every eigenvalue at its conditional posterior mean."""
        hvec = cfg.h + ss.w()
        shape = cfg.a + ss.n / 2.0 - 1.0
        c = hvec.copy()
        lam = c / (ss.n + 2.0 * cfg.a - 4.0)
        return cls(np.eye(ss.p), lam, c, hvec, shape, cfg.b)

    def refresh_c(self) -> None:
        _kernels.compute_c(self.gamma, self.hvec, self.c)

    def check(self, rtol: float = 1e-8) -> None:
        """Raise InvariantError if any state invariant fails."""
        if not np.all(self.lam > 0):
            raise InvariantError("nonpositive eigenvalue in chain state")
        defect = orthogonality_defect(self.gamma)
        if defect > ORTHO_TOL:
            raise InvariantError(f"Gamma lost orthogonality (defect {defect:.3e})")
        fresh = (self.gamma * self.gamma).T @ self.hvec
        if np.max(np.abs(fresh - self.c) / np.abs(fresh)) > rtol:
            raise InvariantError("c cache out of date")

    def copy(self) -> "ChainState":
        return ChainState(
            self.gamma.copy(), self.lam.copy(), self.c.copy(), self.hvec.copy(), self.shape.copy(), self.b
        )


def sample_tilted_beta(c: float, rng: np.random.Generator, size: int | None = None):
    """Draw from the density proportional to ``exp(c a) a^(-1/2) (1 - a)^(-1/2)`` on (0, 1).

    Uses Beta(1/2, 1/2) rejection for ``|c| <= 1`` and a von Mises sampler on
    the doubled angle otherwise, so the cost stays bounded as ``c`` decreases.
    """
    c = float(c)
    if c > 0:
        raise DomainError(f"tilt must be nonpositive, got {c}")
    if size is None:
        return float(_kernels.tilted_beta(c, rng))
    return _kernels.tilted_beta_many(c, int(size), rng)


def sample_lambda_step(state: ChainState, cfg: PriorConfig, n: int, rng: np.random.Generator) -> ChainState:
    """Update all eigenvalues given ``Gamma``.

    ``lam_i ~ InvGamma(a_i + n/2 - 1, c_i / 2)`` exactly when ``b = 1``. For
    ``b = 0`` that draw is an independence-Metropolis proposal corrected by
    the factor ``prod_{j != i} |lam_i - lam_j|``.
    """
    if not np.all(state.c > 0):
        raise InvariantError("nonpositive c entry")
    shape = cfg.a + n / 2.0 - 1.0
    _kernels.lambda_step(state.lam, state.c, shape, cfg.b, rng)
    return state


def sample_pair_rotation(state: ChainState, i: int, j: int, rng: np.random.Generator) -> float:
    """Resample rows ``i < j`` of ``Gamma`` from their rotation conditional.

    Updates ``state`` in place (``c`` included) and returns the realized
    ``cos^2(theta + omega)``.
    """
    if not i < j:
        raise IndexError("pair must satisfy i < j")
    if not np.all(state.lam > 0):
        raise InvariantError("nonpositive eigenvalue in chain state")
    return float(_kernels.pair_update(state.gamma, 1.0 / state.lam, state.c, state.hvec, i, j, rng))


def gibbs_sweep(
    state: ChainState,
    schedule: str | int,
    cfg: PriorConfig,
    ss: SampleSpectrum,
    rng: np.random.Generator,
) -> ChainState:
    """One eigenvalue step followed by one pass of pair rotations."""
    scan_m = 0 if schedule == "full" else int(schedule)
    _kernels.run_sweeps(
        state.gamma, state.lam, state.c, state.hvec, cfg.a + ss.n / 2.0 - 1.0, cfg.b, scan_m, 1, rng
    )
    return state


@dataclass
class PosteriorDraws:
    """Retained draws of one chain.

    ``sorted_lambda[d]`` is descending; ``top_vectors[d, :, i]`` is the
    eigenvector of ``Sigma`` paired with ``sorted_lambda[d, i]``.
    """

    sorted_lambda: NDArray[np.float64]
    top_vectors: NDArray[np.float64]
    loglik: NDArray[np.float64] | None
    settings: McmcSettings
    prior: str = ""
    accept_rate: float = 1.0
    final_defect: float = 0.0
    max_defect: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def n_draws(self) -> int:
        return self.sorted_lambda.shape[0]

    @property
    def k(self) -> int:
        return self.top_vectors.shape[2]

    def summary_dict(self) -> dict:
        lam = self.sorted_lambda
        return {
            "prior": self.prior,
            "n_draws": self.n_draws,
            "p": lam.shape[1],
            "k": self.k,
            "settings": asdict(self.settings),
            "accept_rate": self.accept_rate,
            "posterior_mean": lam.mean(axis=0).tolist(),
            "max_orthogonality_defect": self.max_defect,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary_dict(), indent=2)

    def write_draws_csv(self, path) -> None:
        """One row per draw: sorted eigenvalues, then the top vectors flattened column by column."""
        d, p = self.sorted_lambda.shape
        k = self.k
        header = [f"lambda_{i + 1}" for i in range(p)]
        header += [f"xi_{i + 1}_{r + 1}" for i in range(k) for r in range(p)]
        with Path(path).open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(header)
            for t in range(d):
                vecs = self.top_vectors[t].T.ravel()
                wr.writerow([repr(float(v)) for v in np.concatenate([self.sorted_lambda[t], vecs])])

    @staticmethod
    def read_draws_csv(path, k: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Inverse of :meth:`write_draws_csv`: ``(sorted_lambda, top_vectors)``."""
        raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        p = raw.shape[1] // (k + 1)
        lam = raw[:, :p]
        vecs = raw[:, p:].reshape(raw.shape[0], k, p).transpose(0, 2, 1)
        return lam, vecs


def run_chain(
    ss: SampleSpectrum,
    cfg: PriorConfig,
    ms: McmcSettings | None = None,
    x: DataMatrix | None = None,
    rng: np.random.Generator | None = None,
    k: int | None = None,
) -> PosteriorDraws:
    """Run one Gibbs chain and return the retained draws.

    Parameters
    ----------
    ss : SampleSpectrum
        Spectrum of the data the posterior conditions on.
    cfg : PriorConfig
        Prior; ``cfg.k`` leading eigenvectors are stored per draw unless
        ``k`` overrides it.
    ms : McmcSettings
        Chain length and seed. ``rng``, when given, replaces the seed.
    x : DataMatrix, optional
        The data behind ``ss``; when supplied, per-observation
        log-likelihoods are stored for WAIC.
    """
    ms = ms or McmcSettings()
    cfg.check_dims(ss.n, ss.p)
    rng = np.random.default_rng(ms.seed) if rng is None else rng
    k = cfg.k if k is None else k
    p = ss.p
    state = ChainState.initial(ss, cfg)
    xq = None
    if x is not None:
        if x.values.shape != (ss.n, ss.p):
            raise ConfigError("data matrix does not match the spectrum")
        xq = x.values @ ss.Q

    n_keep = ms.n_retained
    sorted_lam = np.empty((n_keep, p))
    vecs = np.empty((n_keep, p, k))
    loglik = np.empty((n_keep, ss.n)) if xq is not None else None
    accepted = 0
    max_defect = 0.0
    since_reorth = 0

    def advance(n_sweeps: int) -> None:
        nonlocal accepted, since_reorth, max_defect
        while n_sweeps > 0:
            step = min(n_sweeps, ms.reorth_every - since_reorth)
            accepted += _kernels.run_sweeps(
                state.gamma, state.lam, state.c, state.hvec, state.shape, state.b, ms.scan_m, step, rng
            )
            since_reorth += step
            n_sweeps -= step
            if since_reorth == ms.reorth_every:
                max_defect = max(max_defect, orthogonality_defect(state.gamma))
                state.gamma[...] = reorthonormalize(state.gamma)
                state.refresh_c()
                since_reorth = 0

    advance(ms.burn_in)
    for t in range(n_keep):
        advance(ms.thin)
        order = np.argsort(-state.lam, kind="stable")
        sorted_lam[t] = state.lam[order]
        vecs[t] = ss.Q @ state.gamma[:, order[:k]]
        if loglik is not None:
            loglik[t] = gauss_loglik_rows(xq @ state.gamma, state.lam)

    total = (ms.burn_in + n_keep * ms.thin) * p
    final_defect = orthogonality_defect(state.gamma)
    if final_defect > ORTHO_TOL:
        raise InvariantError(f"Gamma lost orthogonality (defect {final_defect:.3e})")
    draws = PosteriorDraws(
        sorted_lam,
        vecs,
        loglik,
        ms,
        prior=cfg.name,
        accept_rate=accepted / total,
        final_defect=final_defect,
        max_defect=max(max_defect, final_defect),
    )
    log.debug("chain done: prior=%s draws=%d accept=%.3f", cfg.name, n_keep, draws.accept_rate)
    return draws
