"""
Simulation harness comparing the six estimators on spiked scenarios.

Each replication draws a fresh data set, runs every requested method and
stores raw per-eigenvalue metrics; aggregates are folded from those raw
records so they can always be recomputed from a saved report.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .estimators import estimate_eigenvectors, spoet, summarize_eigenvalues
from .exceptions import InputError, SpikedCovError
from .model import SpikedScenario, gen_spiked_data, sample_covariance
from .prior import prior_for
from .sampler import McmcSettings, run_chain

__all__ = [
    "CASES",
    "CSV_HEADER",
    "METHODS",
    "SimReport",
    "aggregate",
    "coverage_and_length",
    "err_lambda",
    "err_xi",
    "read_report",
    "run_case",
    "run_replication",
    "scenario_for_case",
    "write_report",
]

log = logging.getLogger(__name__)

METHODS = ("sample", "gsiw", "giw", "siw", "iw", "spoet")
BAYES = ("gsiw", "giw", "siw", "iw")

# (n, p, spikes) presets of the two simulation designs
CASES = {
    1: (50, 500, (50.0, 20.0, 10.0)),
    2: (40, 100, (5.0, 4.0, 3.0)),
}

CSV_HEADER = ["eigenvalue", "n"] + [
    f"{m}_{metric}" for m in METHODS for metric in ("err_lambda", "err_xi", "cp", "il")
]


def scenario_for_case(case: int, n: int | None = None, p: int | None = None) -> SpikedScenario:
    n0, p0, spikes = CASES[case]
    return SpikedScenario(n or n0, p or p0, spikes)


def err_lambda(est: float, truth: float) -> float:
    """Relative error ``|truth - est| / truth``."""
    if not truth > 0:
        raise InputError("true eigenvalue must be positive")
    return abs(truth - est) / truth


def err_xi(est_vec, true_vec) -> float:
    """``1 - (est . truth)^2`` for unit vectors; sign-invariant."""
    a = np.asarray(est_vec, dtype=np.float64)
    b = np.asarray(true_vec, dtype=np.float64)
    if abs(np.linalg.norm(a) - 1) > 1e-6 or abs(np.linalg.norm(b) - 1) > 1e-6:
        raise InputError("eigenvectors must have unit norm")
    return float(min(max(1.0 - float(a @ b) ** 2, 0.0), 1.0))


def coverage_and_length(intervals, truth: float) -> tuple[float, float]:
    """Fraction of ``(lo, hi)`` intervals containing ``truth`` and their mean length."""
    iv = np.asarray(intervals, dtype=np.float64).reshape(-1, 2)
    if iv.shape[0] == 0:
        raise InputError("no intervals")
    hit = (iv[:, 0] <= truth) & (truth <= iv[:, 1])
    return float(hit.mean()), float((iv[:, 1] - iv[:, 0]).mean())


@dataclass
class SimReport:
    scenario: dict
    methods: list[str]
    reps: int
    seed: int
    settings: dict
    raw: list[dict]
    aggregates: dict
    failures: list[dict] = field(default_factory=list)
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "scenario": self.scenario,
            "methods": self.methods,
            "reps": self.reps,
            "seed": self.seed,
            "settings": self.settings,
            "aggregates": self.aggregates,
            "failures": self.failures,
            "raw": self.raw,
        }
        if timing:
            d["wall_time"] = self.wall_time
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimReport":
        return cls(
            d["scenario"], d["methods"], d["reps"], d["seed"], d["settings"],
            d["raw"], d["aggregates"], d.get("failures", []), d.get("wall_time", 0.0),
        )

    def metric(self, method: str, name: str) -> NDArray[np.float64]:
        """Per-index aggregate ``name`` (``err_lambda``, ``err_xi``, ``cp``, ``il``)."""
        return np.array([row[name] for row in self.aggregates[method]], dtype=float)

    def raw_metric(self, method: str, name: str) -> NDArray[np.float64]:
        """``reps x k`` array of a raw metric (NaN where the method failed)."""
        k = len(self.scenario["spikes"])
        out = np.full((len(self.raw), k), np.nan)
        for r, rec in enumerate(self.raw):
            if method in rec and rec[method].get(name) is not None:
                out[r] = rec[method][name]
        return out


def run_replication(sc: SpikedScenario, methods, ms: McmcSettings, seed: int, rep: int) -> tuple[dict, list]:
    """Raw metrics of every method on one simulated data set."""
    rng = np.random.default_rng([seed, rep])
    x = gen_spiked_data(sc, rng)
    ss = sample_covariance(x)
    k = sc.k
    truth = sc.true_eigenvalues()[:k]
    true_vecs = sc.true_eigenvectors()
    ref = ss.Q[:, :k]
    rec, failures = {}, []
    for m in methods:
        try:
            if m == "sample":
                vals, vecs, iv = ss.eigenvalues[:k], ref, None
            elif m == "spoet":
                est = spoet(ss, k)
                vals, vecs, iv = est.values, ref, est.intervals
            else:
                cfg = prior_for(m, ss, k)
                chain_ms = McmcSettings(
                    ms.burn_in, ms.draws, ms.thin, ms.reorth_every,
                    int(rng.integers(2**62)), ms.pair_schedule,
                )
                draws = run_chain(ss, cfg, chain_ms)
                summ = summarize_eigenvalues(draws, k)
                vals = np.array([s.point for s in summ])
                iv = np.array([[s.lo, s.hi] for s in summ])
                vecs = estimate_eigenvectors(draws, ref)
        except SpikedCovError as exc:
            failures.append({"rep": rep, "method": m, "error": str(exc)})
            log.warning("rep %d method %s failed: %s", rep, m, exc)
            continue
        rec[m] = {
            "estimate": [float(v) for v in vals],
            "err_lambda": [err_lambda(v, t) for v, t in zip(vals, truth)],
            "err_xi": [err_xi(vecs[:, i], true_vecs[:, i]) for i in range(k)],
            "interval": None if iv is None else np.asarray(iv).tolist(),
        }
    return rec, failures


def aggregate(raw: list[dict], methods, truth) -> dict:
    """Per-method, per-index means of raw metrics plus coverage and interval length."""
    out = {}
    k = len(truth)
    for m in methods:
        recs = [r[m] for r in raw if m in r]
        rows = []
        for i in range(k):
            row = {"index": i + 1}
            if recs:
                row["err_lambda"] = float(np.mean([r["err_lambda"][i] for r in recs]))
                row["err_xi"] = float(np.mean([r["err_xi"][i] for r in recs]))
            else:
                row["err_lambda"] = row["err_xi"] = None
            ivs = [r["interval"][i] for r in recs if r["interval"] is not None]
            if ivs:
                row["cp"], row["il"] = coverage_and_length(ivs, truth[i])
            else:
                row["cp"] = row["il"] = None
            rows.append(row)
        out[m] = rows
    return out


def run_case(
    sc: SpikedScenario,
    methods=METHODS,
    reps: int = 20,
    ms: McmcSettings | None = None,
    base_seed: int = 0,
    threads: int = 1,
) -> SimReport:
    """Replicate the method comparison ``reps`` times on scenario ``sc``.

    Replication ``r`` uses the stream seeded by ``[base_seed, r]``, so the
    report does not depend on ``threads``.
    """
    methods = [m.lower() for m in methods]
    if not methods:
        raise InputError("no methods requested")
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise InputError(f"unknown methods {bad}")
    if reps < 1:
        raise InputError("reps must be positive")
    ms = ms or McmcSettings()
    t0 = time.perf_counter()

    def one(r):
        return run_replication(sc, methods, ms, base_seed, r)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(one, range(reps)))
    else:
        results = [one(r) for r in range(reps)]
    raw = [rec for rec, _ in results]
    failures = [f for _, fl in results for f in fl]
    truth = list(sc.spikes)
    settings = {
        "burn_in": ms.burn_in, "draws": ms.draws, "thin": ms.thin,
        "reorth_every": ms.reorth_every, "pair_schedule": ms.pair_schedule,
    }
    return SimReport(
        sc.to_dict(), methods, reps, base_seed, settings, raw,
        aggregate(raw, methods, truth), failures, time.perf_counter() - t0,
    )


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def report_csv(report: SimReport) -> str:
    """Table layout: one row per eigenvalue index, four columns per method."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_HEADER)
    k = len(report.scenario["spikes"])
    for i in range(k):
        row = [f"lambda_{i + 1}", report.scenario["n"]]
        for m in METHODS:
            agg = report.aggregates.get(m)
            if agg is None:
                row += ["", "", "", ""]
            else:
                r = agg[i]
                row += [_fmt(r["err_lambda"]), _fmt(r["err_xi"]), _fmt(r["cp"]), _fmt(r["il"])]
        wr.writerow(row)
    return buf.getvalue()


def write_report(report: SimReport, path, fmt: str = "json", timing: bool = True) -> None:
    """Write ``report`` as lossless JSON or as the CSV table."""
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps(report.to_dict(timing), indent=2) + "\n")
    elif fmt == "csv":
        path.write_text(report_csv(report))
    else:
        raise InputError(f"unknown report format {fmt!r}")


def read_report(path) -> SimReport:
    return SimReport.from_dict(json.loads(Path(path).read_text()))
