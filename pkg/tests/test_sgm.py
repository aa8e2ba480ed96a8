import math
import warnings

import numpy as np
import pytest

from oracles import coverage_mc, matern_thinning
from csmabench.bianchi import mac_efficiency, single_rate_timings
from csmabench.curves import CcdfCurve
from csmabench.geometry import RadioConfig
from csmabench.phy import NoLinkError, RateTable
from csmabench.sgm import (
    SgmConfig,
    check_refinement,
    enhanced_overhead,
    map_tagged,
    map_typical,
    rate_coverage,
    rate_threshold_db,
    sinr_ccdf,
    sinr_coverage,
    throughput_ccdf,
)

RADIO = RadioConfig()
DENSITIES = [5e-4, 1e-3, 5e-3, 1e-2]


@pytest.fixture(scope="module")
def cfgs():
    return {lam: SgmConfig(lam, RADIO) for lam in DENSITIES}


@pytest.mark.parametrize("lam", [5e-4, 5e-3])
def test_map_against_thinning_oracle(lam):
    typ, tagged = matern_thinning(lam, RADIO, n_target=100_000, seed=11)
    cfg = SgmConfig(lam, RADIO)
    assert map_typical(cfg) == pytest.approx(typ, rel=0.02)
    assert map_tagged(cfg) == pytest.approx(tagged, rel=0.02)


def test_map_frozen_values(cfgs):
    # thinning-oracle means over 1e5 points, rounded
    assert map_typical(cfgs[5e-4]) == pytest.approx(0.5955, abs=2e-3)
    assert map_tagged(cfgs[5e-4]) == pytest.approx(0.689, abs=5e-3)


def test_map_sparse_limit():
    cfg = SgmConfig(1e-12, RADIO)
    assert map_typical(cfg) == pytest.approx(1.0, abs=1e-6)
    assert map_tagged(cfg) == pytest.approx(1.0, abs=1e-6)


def test_map_ordering(cfgs):
    p = [map_typical(cfgs[lam]) for lam in DENSITIES]
    assert np.all(np.diff(p) < 0)
    for lam in DENSITIES:
        assert map_tagged(cfgs[lam]) >= map_typical(cfgs[lam])


def test_tagged_map_against_throughput_anchor(cfgs):
    assert map_tagged(cfgs[5e-4]) == pytest.approx(52 / 78, abs=0.10)


@pytest.mark.parametrize("lam", [5e-4, 5e-3])
@pytest.mark.parametrize("T", [0.0, 4.0, 10.0, 20.0])
def test_coverage_against_monte_carlo(lam, T):
    cfg = SgmConfig(lam, RADIO)
    assert sinr_coverage(T, cfg) == pytest.approx(coverage_mc(T, lam, RADIO, cfg.p_map), abs=0.03)


def test_coverage_frozen_values(cfgs):
    # direct-sampling oracle values (4e4 trials each), rounded
    c = cfgs[5e-4]
    assert sinr_coverage(4.0, c) == pytest.approx(0.464, abs=0.01)
    assert sinr_coverage(20.0, c) == pytest.approx(0.102, abs=0.01)
    assert sinr_coverage(20.0, cfgs[5e-3]) == pytest.approx(0.552, abs=0.01)


def test_coverage_limits(cfgs):
    c = cfgs[1e-3]
    assert sinr_coverage(-math.inf, c) == 1.0
    assert sinr_coverage(math.inf, c) == 0.0
    assert sinr_coverage(-60.0, c) == pytest.approx(1.0, abs=1e-4)
    with pytest.raises(ValueError):
        sinr_coverage(float("nan"), c)


def test_coverage_monotone_on_grid(cfgs):
    grid = np.linspace(-10, 40, 60)
    for lam in DENSITIES:
        curve = sinr_ccdf(cfgs[lam], grid)
        assert np.all(np.diff(curve.ccdf) <= 0)
        assert len(curve.seconds) == 60


@pytest.mark.parametrize("lam", DENSITIES)
@pytest.mark.parametrize("T", [-5.0, 4.0, 15.0, 27.0, 35.0])
def test_quadrature_refinement(cfgs, lam, T):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        a, b = check_refinement(T, cfgs[lam])
    assert abs(a - b) < 1e-3


@pytest.mark.parametrize("lam", [5e-4, 1e-2])
def test_field_truncation(cfgs, lam):
    c = cfgs[lam]
    wide = c.with_field_radius(2 * c.field_radius)
    for T in (4.0, 20.0):
        assert abs(sinr_coverage(T, c) - sinr_coverage(T, wide)) < 1e-3


def test_config_validation():
    with pytest.raises(ValueError):
        SgmConfig(0.0, RADIO)
    with pytest.raises(ValueError):
        SgmConfig(5e-4, RADIO, field_radius_m=100.0)
    with pytest.raises(ValueError):
        SgmConfig(5e-4, RADIO, outer_points=1)


def test_refinement_warning_reports_both_values(cfgs):
    coarse = SgmConfig(1e-2, RADIO, outer_points=3, field_radial=3, field_angular=2)
    with pytest.warns(RuntimeWarning, match="not converged"):
        check_refinement(10.0, coarse)


def test_rate_coverage_basics(cfgs):
    c = cfgs[5e-4]
    assert rate_coverage(0.0, c) == 1.0
    for rho in (1e6, 20e6, 50e6):
        assert rate_coverage(rho, c, with_overhead=True, S_bar=1.0) == rate_coverage(rho, c)
    with pytest.raises(ValueError):
        rate_coverage(-1.0, c)
    with pytest.raises(ValueError):
        rate_coverage(1e6, c, with_overhead=True, S_bar=1.5)


def test_maximum_throughput_is_tagged_share_of_top_rate(cfgs):
    c = cfgs[5e-4]
    top = c.p_map_tagged * 78e6
    assert rate_coverage(top * (1 - 1e-9), c) > 0
    assert rate_coverage(top * (1 + 1e-9), c) == 0.0


def test_shannon_mode(cfgs):
    c = cfgs[1e-3]
    rho = 10e6
    expected = 10 * math.log10(2 ** (rho / (20e6 * c.p_map_tagged)) - 1)
    assert rate_threshold_db(rho, c, shannon=True) == pytest.approx(expected, rel=1e-12)
    assert 0 < rate_coverage(rho, c, shannon=True) < 1


def test_throughput_cache_matches_direct(cfgs):
    c = cfgs[1e-3]
    grid = np.geomspace(0.1e6, 80e6, 25)
    curve = throughput_ccdf(c, grid)
    assert np.array_equal(curve.ccdf, [rate_coverage(r, c) for r in grid])


def test_enhanced_overhead_single_contender():
    c = SgmConfig(1e-9, RADIO)
    curve = CcdfCurve(np.array([0.0, 10.0, 30.0]), np.array([1.0, 0.6, 0.0]))
    # median 15 dB maps to 26 Mbps
    assert enhanced_overhead(c, RateTable(), curve) == pytest.approx(
        mac_efficiency(single_rate_timings(26e6, 1)), rel=1e-12)


def test_enhanced_overhead_no_link(cfgs):
    curve = CcdfCurve(np.array([0.0, 3.0, 10.0]), np.array([1.0, 0.4, 0.0]))
    with pytest.raises(NoLinkError):
        enhanced_overhead(cfgs[1e-3], RateTable(), curve)


def test_enhanced_overhead_endpoint_fallback(cfgs):
    curve = CcdfCurve(np.array([4.0, 10.0, 30.0]), np.array([0.9, 0.8, 0.6]))
    with pytest.warns(RuntimeWarning):
        s = enhanced_overhead(cfgs[1e-3], RateTable(), curve)
    assert 0 < s <= 1


def test_enhanced_curve_below_raw_when_dense(cfgs):
    c = cfgs[1e-2]
    sinr = sinr_ccdf(c, np.linspace(-10, 40, 60))
    s_bar = enhanced_overhead(c, RateTable(), sinr)
    assert s_bar < 1
    grid = np.geomspace(0.1e6, 80e6, 60)
    raw = throughput_ccdf(c, grid)
    enh = throughput_ccdf(c, grid, S_bar=s_bar)
    assert np.all(enh.ccdf <= raw.ccdf)


def test_parallel_thresholds_match_serial(cfgs):
    grid = np.linspace(0, 30, 8)
    a = sinr_ccdf(cfgs[1e-3], grid, workers=1)
    b = sinr_ccdf(cfgs[1e-3], grid, workers=3)
    assert np.array_equal(a.ccdf, b.ccdf)
