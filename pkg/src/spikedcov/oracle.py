"""
Reference computations that check the sampler by independent routes.

* :func:`tilted_beta_reference` integrates the angle density by quadrature
  and cross-checks its mean against a modified-Bessel closed form.
* :func:`is_posterior_oracle` estimates posterior expectations for small
  ``p`` by importance sampling Haar-distributed ``Gamma`` against the exact
  marginal ``pi(Gamma | X) ~ prod_i c_i^(-(a_i + n/2 - 1))``.
* :func:`lemma_asymptotics_check` compares Monte-Carlo sample eigenvalues
  and eigenvectors with their high-dimensional limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy import integrate, optimize, special, stats

from .exceptions import ConfigError, DomainError, UnreliableOracleError
from .linalg import haar_sample, haar_sample_batch
from .model import SampleSpectrum, SpikedScenario, gen_spiked_data, sample_covariance
from .prior import PriorConfig, gsiw_data_driven

__all__ = [
    "CHECKS",
    "CheckResult",
    "ESS_MIN",
    "LemmaCheck",
    "PosteriorOracle",
    "TiltedBetaReference",
    "ValidationTarget",
    "bessel_mean",
    "check_conditional_lambda",
    "check_is_oracle",
    "check_lemma",
    "check_tilted_beta",
    "is_posterior_oracle",
    "lemma_asymptotics_check",
    "run_checks",
    "tilted_beta_reference",
]

ESS_MIN = 100.0


def bessel_mean(c: float) -> float:
    """Mean of the tilted Beta(1/2, 1/2): ``1/2 + I1(c/2) / (2 I0(c/2))``."""
    x = 0.5 * c
    return 0.5 + 0.5 * special.ive(1, x) / special.ive(0, x)


@dataclass(frozen=True)
class TiltedBetaReference:
    """Quadrature reference for the density ``exp(c a) a^(-1/2) (1-a)^(-1/2)``.

    Integrals are taken in ``u`` with ``a = sin(u)^2``, which turns the
    kernel into the smooth ``2 exp(c sin(u)^2)`` on ``(0, pi/2)``.
    """

    c: float
    normalizer: float
    mean: float
    grid_alpha: NDArray[np.float64] = field(repr=False)
    grid_cdf: NDArray[np.float64] = field(repr=False)

    def _breaks(self, upper: float) -> list[float]:
        if self.c >= -1.0:
            return []
        w = 1.0 / math.sqrt(-self.c)
        return [b for b in (w, 5 * w, 20 * w) if b < upper]

    def cdf(self, alpha: float) -> float:
        if alpha <= 0.0:
            return 0.0
        if alpha >= 1.0:
            return 1.0
        upper = math.asin(math.sqrt(alpha))
        val, _ = integrate.quad(
            lambda u: 2.0 * math.exp(self.c * math.sin(u) ** 2), 0.0, upper,
            points=self._breaks(upper) or None, epsabs=0.0, epsrel=1e-12, limit=200,
        )
        return min(val / self.normalizer, 1.0)

    def ppf(self, q: float) -> float:
        if not 0.0 < q < 1.0:
            raise ValueError("quantile level must lie in (0, 1)")
        return optimize.brentq(lambda a: self.cdf(a) - q, 0.0, 1.0, xtol=1e-15, rtol=1e-13)


def tilted_beta_reference(c: float, n_grid: int = 512) -> TiltedBetaReference:
    """Normalizer, mean and tabulated CDF of the tilted Beta(1/2, 1/2) with tilt ``c``."""
    c = float(c)
    if c > 0:
        raise DomainError(f"tilt must be nonpositive, got {c}")
    half_pi = 0.5 * math.pi
    pts = None
    if c < -1.0:
        w = 1.0 / math.sqrt(-c)
        pts = [b for b in (w, 5 * w, 20 * w) if b < half_pi] or None
    opts = dict(points=pts, epsabs=0.0, epsrel=1e-13, limit=400)
    z, _ = integrate.quad(lambda u: 2.0 * math.exp(c * math.sin(u) ** 2), 0.0, half_pi, **opts)
    m, _ = integrate.quad(
        lambda u: 2.0 * math.sin(u) ** 2 * math.exp(c * math.sin(u) ** 2), 0.0, half_pi, **opts
    )
    mean = m / z
    closed = bessel_mean(c)
    if abs(mean - closed) > 1e-8 * max(abs(closed), 1e-300) + 1e-14:
        raise ArithmeticError(f"quadrature mean {mean!r} disagrees with Bessel form {closed!r}")
    u = np.linspace(0.0, half_pi, n_grid)
    # cumulative trapezoid of the smooth u-integrand on a fine grid, then sampled
    fine = np.linspace(0.0, half_pi, 64 * n_grid)
    f = 2.0 * np.exp(c * np.sin(fine) ** 2)
    cum = integrate.cumulative_trapezoid(f, fine, initial=0.0)
    grid_cdf = np.interp(u, fine, cum / cum[-1])
    return TiltedBetaReference(c, z, mean, np.sin(u) ** 2, grid_cdf)


@dataclass(frozen=True)
class PosteriorOracle:
    """Self-normalized importance-sampling estimates with standard errors.

    ``sorted_lambda[i]`` estimates ``E[lam_(i+1) | X]``; ``err_xi[j]``
    estimates ``E[1 - (t_j . xi_(j+1))^2 | X]`` for the supplied truth
    vectors ``t_j``; ``unordered_lambda`` uses the analytic inner mean.
    """

    sorted_lambda: NDArray[np.float64]
    sorted_lambda_se: NDArray[np.float64]
    err_xi: NDArray[np.float64]
    err_xi_se: NDArray[np.float64]
    unordered_lambda: NDArray[np.float64]
    ess: float
    n_samples: int


def _weighted(w: NDArray[np.float64], f: NDArray[np.float64]) -> tuple[NDArray, NDArray]:
    sw = w.sum()
    mu = (w[:, None] * f).sum(axis=0) / sw
    var = (w[:, None] ** 2 * (f - mu) ** 2).sum(axis=0) / sw**2
    return mu, np.sqrt(var)


def is_posterior_oracle(
    ss: SampleSpectrum,
    cfg: PriorConfig,
    n_samples: int,
    rng: np.random.Generator,
    truth: NDArray[np.float64] | None = None,
    chunk: int = 100_000,
    ess_min: float = ESS_MIN,
) -> PosteriorOracle:
    """Posterior expectations by importance sampling over the orthogonal group.

    Proposals are Haar draws of ``Gamma``; log-weights are
    ``-sum_i (a_i + n/2 - 1) log c_i(Gamma)``. Ordered-eigenvalue
    functionals use one exact inverse-gamma draw of ``Lam`` per ``Gamma``.
    Requires ``b = 1``, where the eigenvalues integrate out in closed form.

    Raises
    ------
    UnreliableOracleError
        If the effective sample size falls below ``ess_min``.
    """
    if cfg.b != 1:
        raise ConfigError("the importance-sampling oracle needs b = 1")
    p, n = ss.p, ss.n
    cfg.check_dims(n, p)
    k = max(cfg.k, 1)
    truth = np.eye(p)[:, :k] if truth is None else np.asarray(truth, dtype=np.float64).reshape(p, -1)
    hvec = cfg.h + ss.w()
    shape = cfg.a + n / 2.0 - 1.0
    logw, f_sorted, f_err, f_unord = [], [], [], []
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        g = haar_sample_batch(m, p, rng)
        c = np.einsum("nji,j->ni", g * g, hvec)
        logw.append(-(np.log(c) * shape).sum(axis=1))
        f_unord.append(c / (n + 2.0 * cfg.a - 4.0))
        lam = 0.5 * c / rng.standard_gamma(shape, size=(m, p))
        order = np.argsort(-lam, axis=1, kind="stable")
        f_sorted.append(np.take_along_axis(lam, order, axis=1))
        cols = np.take_along_axis(g, order[:, None, :k], axis=2)
        u = np.einsum("ij,njk->nik", ss.Q, cols)
        dots = np.einsum("nik,ik->nk", u, truth[:, : cols.shape[2]])
        f_err.append(1.0 - dots**2)
        done += m
    lw = np.concatenate(logw)
    w = np.exp(lw - lw.max())
    ess = float(w.sum() ** 2 / (w * w).sum())
    if ess < ess_min:
        raise UnreliableOracleError(f"effective sample size {ess:.1f} below {ess_min}")
    mu_s, se_s = _weighted(w, np.concatenate(f_sorted))
    mu_e, se_e = _weighted(w, np.concatenate(f_err))
    mu_u, _ = _weighted(w, np.concatenate(f_unord))
    return PosteriorOracle(mu_s, se_s, mu_e, se_e, mu_u, ess, n_samples)


@dataclass(frozen=True)
class ValidationTarget:
    """Spiked scenario with its predicted sample-eigenstructure limits."""

    n: int
    p: int
    spikes: tuple[float, ...]
    base: float = 1.0

    @property
    def d(self) -> NDArray[np.float64]:
        """``d_j = p / (n lam_j)`` for each spike."""
        return self.p / (self.n * np.asarray(self.spikes, dtype=np.float64))

    @property
    def d_bar(self) -> float:
        """Mean of the non-spiked true eigenvalues."""
        return self.base

    @property
    def predicted_ratio(self) -> NDArray[np.float64]:
        return 1.0 + self.d_bar * self.d

    @property
    def predicted_alignment(self) -> NDArray[np.float64]:
        return self.predicted_ratio ** -0.5

    def scenario(self) -> SpikedScenario:
        return SpikedScenario(self.n, self.p, self.spikes, self.base)


@dataclass(frozen=True)
class LemmaCheck:
    mean_ratio: NDArray[np.float64]
    se_ratio: NDArray[np.float64]
    predicted_ratio: NDArray[np.float64]
    mean_alignment: NDArray[np.float64]
    se_alignment: NDArray[np.float64]
    predicted_alignment: NDArray[np.float64]
    reps: int
    message: str = ""

    @property
    def ratio_deviation(self) -> NDArray[np.float64]:
        return np.abs(self.mean_ratio - self.predicted_ratio)

    @property
    def alignment_deviation(self) -> NDArray[np.float64]:
        return np.abs(self.mean_alignment - self.predicted_alignment)


def lemma_asymptotics_check(vt: ValidationTarget, reps: int, rng: np.random.Generator) -> LemmaCheck:
    """Monte-Carlo means of ``lam_hat_j / lam_j`` and ``|xi_j . xi_hat_j|`` against their limits."""
    k = len(vt.spikes)
    empty = np.zeros(0)
    if k == 0:
        return LemmaCheck(empty, empty, empty, empty, empty, empty, 0, "no spikes: nothing to check")
    sc = vt.scenario()
    lam0 = np.asarray(vt.spikes)
    ratios = np.empty((reps, k))
    aligns = np.empty((reps, k))
    for r in range(reps):
        x = gen_spiked_data(sc, rng).values
        n = x.shape[0]
        if vt.p > vt.n:
            w, u = np.linalg.eigh(x @ x.T / n)
            w, u = w[::-1][:k], u[:, ::-1][:, :k]
            v = x.T @ u
            v /= np.linalg.norm(v, axis=0)
        else:
            w, v = np.linalg.eigh(x.T @ x / n)
            w, v = w[::-1][:k], v[:, ::-1][:, :k]
        ratios[r] = w / lam0
        aligns[r] = np.abs(v[np.arange(k), np.arange(k)])
    se = lambda a: a.std(axis=0, ddof=1) / math.sqrt(reps)  # noqa: E731
    return LemmaCheck(
        ratios.mean(axis=0), se(ratios), vt.predicted_ratio,
        aligns.mean(axis=0), se(aligns), vt.predicted_alignment, reps,
    )


# -- pass/fail checks shared by the ``validate`` command and the test suite --


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def check_tilted_beta(c: float, n_draws: int, rng: np.random.Generator, n_bins: int = 20) -> CheckResult:
    """Sample mean within 4 SE of the Bessel mean and an equal-mass chi-square GOF with p > 0.001."""
    from .sampler import sample_tilted_beta

    ref = tilted_beta_reference(c)
    x = sample_tilted_beta(c, rng, size=n_draws)
    se = x.std(ddof=1) / math.sqrt(n_draws)
    z = abs(x.mean() - ref.mean) / se
    edges = [ref.ppf(q) for q in np.arange(1, n_bins) / n_bins]
    counts = np.bincount(np.searchsorted(edges, x), minlength=n_bins)
    pval = float(stats.chisquare(counts).pvalue)
    ok = z <= 4.0 and pval > 1e-3
    return CheckResult(f"tilted_beta c={c:g}", ok, f"|z|={z:.2f} chi2 p={pval:.3g}")


def check_conditional_lambda(
    n: int = 30, p: int = 10, n_gamma: int = 5, n_draws: int = 20_000, rng: np.random.Generator | None = None
) -> CheckResult:
    """For fixed random ``Gamma`` the eigenvalue step has mean ``c_i / (n + 2 a_i - 4)`` (b = 1)."""
    from .sampler import ChainState, sample_lambda_step

    rng = rng or np.random.default_rng(0)
    x = gen_spiked_data(SpikedScenario(n, p, (8.0, 4.0)), rng)
    ss = sample_covariance(x)
    cfg = gsiw_data_driven(ss, 2)
    worst = 0.0
    for _ in range(n_gamma):
        st = ChainState.initial(ss, cfg)
        st.gamma[...] = haar_sample(p, rng)
        st.refresh_c()
        lam = np.empty((n_draws, p))
        for t in range(n_draws):
            sample_lambda_step(st, cfg, n, rng)
            lam[t] = st.lam
        target = st.c / (n + 2.0 * cfg.a - 4.0)
        se = lam.std(axis=0, ddof=1) / math.sqrt(n_draws)
        worst = max(worst, float(np.max(np.abs(lam.mean(axis=0) - target) / se)))
    return CheckResult("conditional eigenvalue mean", worst <= 4.0, f"max |z|={worst:.2f}")


def check_is_oracle(
    n_is: int = 1_000_000, draws: int = 100_000, rng: np.random.Generator | None = None, seed: int = 0
) -> CheckResult:
    """Gibbs chain versus the Haar importance-sampling posterior at ``p = 4``, ``n = 12``."""
    from .estimators import batch_means_se
    from .sampler import McmcSettings, run_chain

    rng = rng or np.random.default_rng(seed)
    x = gen_spiked_data(SpikedScenario(12, 4, (8.0,)), rng)
    ss = sample_covariance(x)
    cfg = gsiw_data_driven(ss, 1)
    o = is_posterior_oracle(ss, cfg, n_is, rng)
    d = run_chain(ss, cfg, McmcSettings(1000, draws), rng=rng)
    l1 = d.sorted_lambda[:, 0]
    e1 = 1.0 - d.top_vectors[:, 0, 0] ** 2
    z_lam = abs(l1.mean() - o.sorted_lambda[0]) / math.hypot(batch_means_se(l1), o.sorted_lambda_se[0])
    z_xi = abs(e1.mean() - o.err_xi[0]) / math.hypot(batch_means_se(e1), o.err_xi_se[0])
    ok = z_lam <= 3.0 and z_xi <= 3.0
    return CheckResult(
        "posterior vs importance sampling", ok,
        f"E[lam_(1)] {l1.mean():.4f} vs {o.sorted_lambda[0]:.4f} (z={z_lam:.2f}); "
        f"E[err_xi] {e1.mean():.4f} vs {o.err_xi[0]:.4f} (z={z_xi:.2f}); ESS={o.ess:.0f}",
    )


def check_lemma(reps: int = 200, rng: np.random.Generator | None = None) -> CheckResult:
    """Sample spike bias and alignment at ``n = 100``, ``p = 1000``, spike 50."""
    rng = rng or np.random.default_rng(0)
    chk = lemma_asymptotics_check(ValidationTarget(100, 1000, (50.0,)), reps, rng)
    dr, da = float(chk.ratio_deviation[0]), float(chk.alignment_deviation[0])
    return CheckResult(
        "sample eigenstructure limits", dr <= 0.05 and da <= 0.02,
        f"ratio {chk.mean_ratio[0]:.4f} vs {chk.predicted_ratio[0]:.4f}; "
        f"alignment {chk.mean_alignment[0]:.4f} vs {chk.predicted_alignment[0]:.4f}",
    )


CHECKS = ("tilted_beta", "conditional", "is_oracle", "lemma")


def run_checks(seed: int = 0, quick: bool = False) -> list[CheckResult]:
    """Every oracle check; ``quick`` shrinks sample sizes for a fast smoke run."""
    ss = np.random.SeedSequence(seed).spawn(4)
    rngs = [np.random.default_rng(s) for s in ss]
    n_tb = 5000 if quick else 20_000
    out = [check_tilted_beta(c, n_tb, rngs[0]) for c in (0.0, -1.0, -10.0, -100.0, -1000.0)]
    out.append(check_conditional_lambda(n_draws=2000 if quick else 20_000, rng=rngs[1]))
    if quick:
        out.append(check_is_oracle(100_000, 20_000, rng=rngs[2]))
    else:
        out.append(check_is_oracle(rng=rngs[2]))
    out.append(check_lemma(40 if quick else 200, rng=rngs[3]))
    return out
