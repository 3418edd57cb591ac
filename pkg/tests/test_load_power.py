import pytest
from hypothesis import given, strategies as st

from nodebatt.errors import DomainError
from nodebatt.load_power import (
    LoadProfile,
    PowerSeries,
    current_draw,
    instantaneous_power,
    load_sweep,
    power_curve,
)
from nodebatt.polyfit import fit, preset

_mag = st.floats(min_value=1e-6, max_value=10)
volts = st.just(0.0) | _mag | _mag.map(lambda x: -x)
ohms = st.floats(min_value=1.0, max_value=1e7)


def test_instantaneous_power():
    assert instantaneous_power(3.3, 15000) == pytest.approx(0.726, rel=1e-12)
    assert instantaneous_power(0, 42) == 0
    assert instantaneous_power(2.0, 7500) == pytest.approx(0.5333333333, rel=1e-9)
    for bad in (0, -5, float("inf")):
        with pytest.raises(DomainError):
            instantaneous_power(3.3, bad)


def test_current_draw():
    assert current_draw(3.3, 15000) == pytest.approx(0.22, rel=1e-12)
    assert current_draw(0, 1000) == 0
    assert current_draw(3.0, 1000) == pytest.approx(3.0, rel=1e-15)
    with pytest.raises(DomainError):
        current_draw(3.0, 0)


def test_power_curve():
    c = preset("farnell_15k")
    s = power_curve(c, 15000, [0])
    assert s.points() == [(0.0, pytest.approx(0.7224842666666667, rel=1e-12))]
    assert len(power_curve(c, 15000, [])) == 0
    s = power_curve(c, 15000, [0, 1050])
    # 1.983765625**2 / 15000 W
    assert s.p[1] == pytest.approx(0.26235507032877603, rel=1e-9)


def test_power_series_requires_increasing_t():
    with pytest.raises(DomainError):
        PowerSeries((0.0, 0.0), (1.0, 1.0))


def test_load_sweep():
    assert load_sweep(3.3, [1000])[0][1] == pytest.approx(10.89, rel=1e-12)
    assert load_sweep(3.3, [20000])[0][1] == pytest.approx(0.5445, rel=1e-12)
    assert all(p == 0 for _, p in load_sweep(0, [1000, 5000, 20000]))
    with pytest.raises(DomainError):
        load_sweep(3.3, [1000, -1])


def test_load_profile_kohm():
    assert LoadProfile.from_kohm(7.5).resistance == 7500
    with pytest.raises(DomainError):
        LoadProfile(0)


@given(volts, ohms)
def test_power_times_r_is_v_squared(v, r):
    assert instantaneous_power(v, r) * r / 1000 == pytest.approx(v * v, rel=1e-12, abs=0)


@given(volts, ohms)
def test_halving_r_doubles_power(v, r):
    assert instantaneous_power(v, r / 2) == pytest.approx(2 * instantaneous_power(v, r), rel=1e-12, abs=0)


@given(volts, ohms)
def test_current_times_v_is_power(v, r):
    assert current_draw(v, r) * v == pytest.approx(instantaneous_power(v, r), rel=1e-12, abs=0)


def test_power_curve_monotone_when_voltage_declines():
    c = fit([(t, 3.3 - 1e-3 * t - 1e-6 * t * t) for t in range(0, 1001, 50)], 4)
    grid = [float(t) for t in range(0, 1001, 5)]
    vs = [c(t) for t in grid]
    assert all(b <= a for a, b in zip(vs, vs[1:])) and min(vs) >= 0
    ps = power_curve(c, 15000, grid).p
    assert all(b <= a for a, b in zip(ps, ps[1:]))
