import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from csmabench.phy import FrameTimings, NoLinkError, RateTable, frame_duration, inv_rate, rate_of_sinr

TABLE = RateTable()


def test_below_first_threshold_is_no_link():
    assert rate_of_sinr(3.9) == 0.0


def test_saturates_at_top_rate():
    assert rate_of_sinr(30.0) == 78e6


@pytest.mark.parametrize("th,rate", list(zip(TABLE.thresholds_db, TABLE.rates_bps)))
def test_right_continuous_at_each_threshold(th, rate):
    assert rate_of_sinr(th) == rate
    assert rate_of_sinr(np.nextafter(th, -np.inf)) < rate


def test_vectorised_matches_scalar():
    s = np.linspace(-5, 35, 81)
    assert np.array_equal(rate_of_sinr(s), [rate_of_sinr(float(x)) for x in s])


def test_inverse_endpoints():
    assert inv_rate(78e6) == 27.0
    assert inv_rate(0.0) == -math.inf
    assert inv_rate(-1.0) == -math.inf
    assert inv_rate(78e6 + 1) == math.inf


def test_inverse_sweep_over_table():
    for r in np.linspace(1.0, 78e6, 997):
        assert rate_of_sinr(inv_rate(r)) >= r


@given(st.floats(4.0, 60.0))
def test_round_trip_never_exceeds_sinr(s):
    assert inv_rate(rate_of_sinr(s)) <= s


@given(st.floats(-50, 60), st.floats(-50, 60))
def test_rate_monotone(a, b):
    lo, hi = sorted((a, b))
    assert rate_of_sinr(lo) <= rate_of_sinr(hi)


def test_frame_duration_values():
    assert frame_duration(6.5e6) == pytest.approx(40e-6 + 12320 / 6.5e6, rel=1e-12)
    assert frame_duration(6.5e6) == pytest.approx(1.935e-3, abs=1e-6)
    assert frame_duration(78e6) == pytest.approx(1.980e-4, abs=1e-6)
    assert frame_duration(1e15) == pytest.approx(40e-6, rel=1e-6)


def test_frame_duration_rejects_zero_rate():
    with pytest.raises(NoLinkError):
        frame_duration(0.0)


@given(st.floats(1e5, 1e10), st.floats(1e5, 1e10))
def test_frame_duration_decreasing(a, b):
    lo, hi = sorted((a, b))
    assert frame_duration(lo) >= frame_duration(hi)


def test_timing_invariants():
    t = FrameTimings()
    assert t.difs_s == pytest.approx(t.sifs_s + 2 * t.sigma_s)
    assert t.backoff_stages == 6
    with pytest.raises(ValueError):
        FrameTimings(difs_s=30e-6)
    with pytest.raises(ValueError):
        FrameTimings(cw_max=1000)


def test_table_validation_and_csv(tmp_path):
    with pytest.raises(ValueError):
        RateTable((4.0, 3.0), (1e6, 2e6))
    with pytest.raises(ValueError):
        RateTable((4.0, 5.0), (2e6, 1e6))
    p = tmp_path / "rates.csv"
    TABLE.to_csv(p)
    assert RateTable.from_csv(p) == TABLE
