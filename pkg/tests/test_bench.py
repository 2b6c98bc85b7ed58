from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from spikedcov.bench import (
    CSV_HEADER,
    METHODS,
    SimReport,
    aggregate,
    coverage_and_length,
    err_lambda,
    err_xi,
    read_report,
    report_csv,
    run_case,
    scenario_for_case,
    write_report,
)
from spikedcov.exceptions import InputError
from spikedcov.model import SpikedScenario
from spikedcov.sampler import McmcSettings

DATA = Path(__file__).parent / "data"
TINY = dict(sc=SpikedScenario(20, 30, (12.0, 6.0)), reps=2, ms=McmcSettings(20, 40), base_seed=5)


def test_err_lambda(rng):
    assert err_lambda(5.0, 5.0) == 0.0
    assert err_lambda(4.0, 5.0) == pytest.approx(0.2)
    for est, truth in rng.uniform(0.1, 10, (20, 2)):
        assert err_lambda(est, truth) == pytest.approx(abs(truth - est) / truth)
    with pytest.raises(InputError):
        err_lambda(1.0, 0.0)


def test_err_xi(rng):
    v = rng.standard_normal(5)
    v /= np.linalg.norm(v)
    assert err_xi(v, v) == pytest.approx(0.0, abs=1e-15)
    assert err_xi(v, -v) == pytest.approx(0.0, abs=1e-15)
    assert err_xi([1.0, 0.0], [0.0, 1.0]) == 1.0
    with pytest.raises(InputError):
        err_xi([1.0, 1.0], [1.0, 0.0])


def test_coverage():
    assert coverage_and_length([[0, 2], [1, 3]], 1.5) == (1.0, 2.0)
    assert coverage_and_length([[0, 1], [2, 3]], 1.5)[0] == 0.0
    cp, il = coverage_and_length([[0, 2], [1, 3], [2, 4], [1.5, 1.6]], 1.5)
    assert cp == 0.75 and il == pytest.approx((2 + 2 + 2 + 0.1) / 4)
    with pytest.raises(InputError):
        coverage_and_length([], 1.0)


def test_cases():
    sc = scenario_for_case(2)
    assert (sc.n, sc.p, sc.spikes) == (40, 100, (5.0, 4.0, 3.0))
    assert scenario_for_case(1, n=30).n == 30


def test_sample_only_single_rep():
    rep = run_case(SpikedScenario(30, 20, (9.0, 4.0)), ["sample"], reps=1, base_seed=0)
    row = rep.aggregates["sample"][0]
    assert row["cp"] is None and 0 <= row["err_xi"] <= 1
    assert rep.failures == []


@pytest.fixture(scope="module")
def tiny_report():
    return run_case(TINY["sc"], METHODS, TINY["reps"], TINY["ms"], TINY["base_seed"])


def test_reproducible_and_thread_independent(tiny_report):
    again = run_case(TINY["sc"], METHODS, TINY["reps"], TINY["ms"], TINY["base_seed"], threads=2)
    assert again == tiny_report


def test_aggregates_match_raw(tiny_report):
    truth = list(TINY["sc"].spikes)
    assert aggregate(tiny_report.raw, METHODS, truth) == tiny_report.aggregates
    for m in METHODS:
        raw = tiny_report.raw_metric(m, "err_lambda")
        np.testing.assert_allclose(tiny_report.metric(m, "err_lambda"), raw.mean(axis=0))
    # order of replications does not matter
    rev = aggregate(tiny_report.raw[::-1], METHODS, truth)
    for m in METHODS:
        for a, b in zip(rev[m], tiny_report.aggregates[m]):
            for key in a:
                if a[key] is not None:
                    assert a[key] == pytest.approx(b[key], rel=1e-12)


def test_cp_bounds(tiny_report):
    for m in ("gsiw", "giw", "siw", "iw", "spoet"):
        cp = tiny_report.metric(m, "cp")
        assert np.all((0 <= cp) & (cp <= 1))


def test_failures_recorded():
    # S-POET denominator n p - n k - p k is negative here, the other methods still run
    rep = run_case(SpikedScenario(3, 3, (9.0,)), ["sample", "spoet"], reps=1)
    assert rep.failures and rep.failures[0]["method"] == "spoet"
    assert "sample" in rep.raw[0]


def test_bad_methods():
    with pytest.raises(InputError):
        run_case(TINY["sc"], ["bootstrap"], 1)
    with pytest.raises(InputError):
        run_case(TINY["sc"], [], 1)


def test_json_round_trip(tiny_report, tmp_path):
    f = tmp_path / "r.json"
    write_report(tiny_report, f)
    assert read_report(f) == tiny_report


def test_csv_layout(tiny_report, tmp_path):
    f = tmp_path / "r.csv"
    write_report(tiny_report, f, "csv")
    lines = f.read_text().splitlines()
    assert lines[0].split(",") == CSV_HEADER
    assert len(lines) == 1 + len(TINY["sc"].spikes)
    assert lines[1].startswith("lambda_1,20,")


def test_golden(tiny_report):
    golden = json.loads((DATA / "golden_tiny_report.json").read_text())
    assert tiny_report.to_dict(timing=False) == golden


def test_unknown_format(tiny_report, tmp_path):
    with pytest.raises(InputError):
        write_report(tiny_report, tmp_path / "r.x", "xml")
