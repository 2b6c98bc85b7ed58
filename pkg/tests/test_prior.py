from __future__ import annotations

import numpy as np
import pytest

from spikedcov.exceptions import ConfigError
from spikedcov.model import SampleSpectrum, SpikedScenario, gen_spiked_data, sample_covariance
from spikedcov.prior import (
    PriorConfig,
    giw_data_driven,
    gsiw_data_driven,
    iw_fixed,
    nonspiked_mean,
    prior_for,
    siw_fixed,
    validate_assumptions,
)


def test_worked_shape():
    ss = SampleSpectrum.from_eigenvalues([10, 2, 1, 1], n=4)
    cfg = gsiw_data_driven(ss, 1)
    assert nonspiked_mean(ss, 1) == pytest.approx(4 / 3)
    assert cfg.a[0] == pytest.approx(4 / 13 + 2)
    assert (cfg.b, cfg.h, cfg.k) == (1, 4.0, 1)


def test_shape_identity_and_monotone(wide_data):
    _, ss = wide_data
    for k in (1, 2, 3):
        cfg = gsiw_data_driven(ss, k)
        t = nonspiked_mean(ss, k)
        lam = ss.eigenvalues[:k]
        np.testing.assert_allclose(2 * cfg.a[:k] - 4, ss.n * t / (lam - t), rtol=1e-12)
        assert np.all(np.diff(cfg.a) >= 0)


def test_bulk_and_tail_levels(wide_data):
    _, ss = wide_data
    cfg = gsiw_data_driven(ss, 2)
    n, p = ss.n, ss.p
    assert np.all(cfg.a[2:n] == max(p / 2, cfg.a[1]))
    assert np.all(cfg.a[n:] == 2 * p)


def test_bulk_raised_when_spike_shape_large():
    # weak spike: a_1 far above p/2, so the bulk must follow it up
    ss = SampleSpectrum.from_eigenvalues([1.1, 1.0, 1.0, 1.0, 1.0, 1.0], n=100, p=6)
    cfg = gsiw_data_driven(ss, 1)
    assert cfg.a[0] > 3
    assert np.all(cfg.a[1:] == cfg.a[0])


@pytest.mark.parametrize("lam", [[4, 4, 1, 1, 1, 1], [3, 3, 3, 3]])
def test_spike_not_above_mean(lam):
    ss = SampleSpectrum.from_eigenvalues(lam, n=len(lam))
    k = 2 if lam[0] == 4 else 1
    if k == 2:
        # lam_2 = 4 > t = 1 passes; force failure with k = 1 on the flat tail instead
        ss = SampleSpectrum.from_eigenvalues([4, 1, 1, 1], n=4)
        with pytest.raises(ConfigError, match="1"):
            gsiw_data_driven(ss, 3)
    else:
        with pytest.raises(ConfigError, match="eigenvalue 1"):
            gsiw_data_driven(ss, 1)


def test_giw_shares_shapes(wide_data):
    _, ss = wide_data
    g, h = gsiw_data_driven(ss, 2), giw_data_driven(ss, 2)
    np.testing.assert_array_equal(g.a, h.a)
    assert (h.b, h.h) == (0, 4.0)


def test_fixed_priors():
    s = siw_fixed(10)
    assert np.all(s.a == 4) and s.b == 1 and s.h == 4
    w = iw_fixed(100)
    assert np.all(w.a == 101) and w.b == 0 and w.h == 1


@pytest.mark.parametrize("n,p", [(9, 4), (12, 30), (40, 10)])
def test_all_builders_valid(rng, n, p):
    ss = sample_covariance(gen_spiked_data(SpikedScenario(n, p, (30.0,)), rng))
    for name in ("gsiw", "giw", "siw", "iw"):
        cfg = prior_for(name, ss, 1)
        cfg.check_dims(n, p)
        assert cfg.p == p
    with pytest.raises(ConfigError):
        prior_for("wishart", ss, 1)


@pytest.mark.parametrize("kw", [dict(a=[2.0, 3.0]), dict(a=[4.0, 3.0]), dict(b=2), dict(h=0.0), dict(h=-1.0)])
def test_config_invariants(kw):
    args = dict(a=[3.0, 4.0], b=1, h=4.0) | kw
    with pytest.raises(ConfigError):
        PriorConfig(**args)


def test_check_dims():
    cfg = siw_fixed(5, k=2)
    with pytest.raises(ConfigError):
        cfg.check_dims(10, 6)
    with pytest.raises(ConfigError):
        cfg.check_dims(2, 5)


def test_json_round_trip(wide_data):
    cfg = gsiw_data_driven(wide_data[1], 2).with_h(2.5)
    back = PriorConfig.from_json(cfg.to_json())
    assert back == cfg
    assert back.h == 2.5


class TestAssumptions:
    def test_case1_design_clean(self):
        assert validate_assumptions(SpikedScenario(50, 500, (50.0, 20.0, 10.0))) == []

    def test_small_gap(self):
        msgs = validate_assumptions(SpikedScenario(50, 500, (5.0, 4.9)))
        assert any(m.startswith("A3") for m in msgs)

    def test_ratio(self):
        msgs = validate_assumptions(SpikedScenario(100, 50, (20.0,)))
        assert any(m.startswith("A1") for m in msgs)
