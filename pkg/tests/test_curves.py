import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from csmabench.curves import CcdfCurve, compare_curves, empirical_ccdf, read_meta


def test_identical_curves_zero():
    c = CcdfCurve(np.linspace(0, 10, 11), np.linspace(1, 0, 11))
    assert compare_curves(c, c) == 0.0


def test_constant_curves_distance():
    x = np.linspace(0, 10, 11)
    a, b = CcdfCurve(x, np.full(11, 0.7)), CcdfCurve(x, np.full(11, 0.45))
    assert compare_curves(a, b) == pytest.approx(25.0)


@given(st.lists(st.floats(0, 1), min_size=3, max_size=30), st.lists(st.floats(0, 1), min_size=3, max_size=30))
def test_symmetric_on_shared_grid(u, v):
    n = min(len(u), len(v))
    x = np.arange(n, dtype=float)
    a = CcdfCurve(x, np.sort(u[:n])[::-1])
    b = CcdfCurve(x, np.sort(v[:n])[::-1])
    assert compare_curves(a, b) == pytest.approx(compare_curves(b, a))


def test_interpolates_b_onto_a_grid():
    a = CcdfCurve(np.array([0.0, 0.5, 1.0]), np.array([1.0, 0.5, 0.0]))
    b = CcdfCurve(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    assert compare_curves(a, b) == pytest.approx(0.0, abs=1e-12)


def test_disjoint_ranges_rejected():
    a = CcdfCurve(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    b = CcdfCurve(np.array([2.0, 3.0]), np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        compare_curves(a, b)


def test_validation():
    with pytest.raises(ValueError):
        CcdfCurve(np.array([0.0, 1.0]), np.array([0.2, 0.5]))
    with pytest.raises(ValueError):
        CcdfCurve(np.array([1.0, 0.0]), np.array([0.5, 0.2]))
    with pytest.raises(ValueError):
        CcdfCurve(np.array([0.0, 1.0]), np.array([1.5, 0.2]))


def test_step_for_identical_values():
    c = empirical_ccdf([3.0] * 10, [1.0, 2.999, 3.0, 5.0])
    assert list(c.ccdf) == [1.0, 1.0, 0.0, 0.0]


def test_minus_inf_counts_as_no_link():
    c = empirical_ccdf([-np.inf, 5.0], [-100.0, 0.0])
    assert list(c.ccdf) == [0.5, 0.5]


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=200))
def test_empirical_is_proper(vals):
    c = empirical_ccdf(vals, np.linspace(-60, 60, 41))
    assert c.ccdf[0] == 1.0
    assert np.all(np.diff(c.ccdf) <= 0)
    assert np.all((c.ccdf >= 0) & (c.ccdf <= 1))


def test_median_interpolates():
    c = CcdfCurve(np.array([0.0, 10.0]), np.array([1.0, 0.0]))
    assert c.median() == pytest.approx(5.0)
    with pytest.raises(ValueError):
        CcdfCurve(np.array([0.0, 1.0]), np.array([0.9, 0.6])).median()


def test_csv_round_trip(tmp_path):
    c = CcdfCurve(np.array([0.1, 0.2, 0.3]), np.array([0.9, 0.4, 0.1]), np.array([1.0, 2.0, 3.0]))
    p = tmp_path / "c.csv"
    c.to_csv(p, {"model": "x", "density": 5})
    back = CcdfCurve.from_csv(p)
    assert np.array_equal(back.thresholds, c.thresholds)
    assert np.array_equal(back.ccdf, c.ccdf)
    assert np.array_equal(back.seconds, c.seconds)
    assert read_meta(p) == {"model": "x", "density": "5"}
