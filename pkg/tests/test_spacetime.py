import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wicktorus.spacetime import (
    EDGE_DECAY,
    SpaceTimeField,
    bump,
    bump_delta,
    make_time_grid,
)
from wicktorus.torus import TorusSpec

T = TorusSpec(1.41421356237)


def _bump_scalar(t: float) -> float:
    # independent scalar reimplementation of the documented transition formula
    t = abs(t)
    if t <= 0.5:
        return 1.0
    if t >= 1.0:
        return 0.0
    x = 2.0 * (1.0 - t)
    a = math.exp(-1.0 / x)
    b = math.exp(-1.0 / (1.0 - x))
    return a / (a + b)


def test_bump_plateau_and_support():
    assert bump(0.0) == 1.0
    assert bump(0.5) == 1.0
    assert bump(-0.5) == 1.0
    assert bump(1.0) == 0.0
    assert bump(-1.0) == 0.0
    assert bump(7.0) == 0.0
    vals = bump(np.linspace(-2.0, 2.0, 401))
    assert np.all(vals >= 0.0)
    assert np.all(vals <= 1.0)


def test_bump_midpoint_is_half():
    # at |t| = 3/4 the transition variable is 1/2, where the step is symmetric
    assert bump(0.75) == pytest.approx(0.5, abs=1e-15)
    assert bump(-0.75) == pytest.approx(0.5, abs=1e-15)


def test_bump_matches_scalar_formula():
    ts = np.linspace(-1.5, 1.5, 601)
    got = bump(ts)
    want = np.array([_bump_scalar(float(t)) for t in ts])
    assert np.max(np.abs(got - want)) <= 1e-15


def test_bump_transition_complement():
    # S(x) + S(1-x) = 1: evaluate at exact dyadic offsets around t = 3/4 so
    # every intermediate is exact and the two calls share psi arguments
    for k in range(1, 64):
        u = k / 256.0
        s = float(bump(0.75 - u) + bump(0.75 + u))
        assert abs(s - 1.0) <= 1e-14


def test_bump_monotone_on_transition():
    ts = np.linspace(0.5, 1.0, 257)
    vals = bump(ts)
    assert np.all(np.diff(vals) <= 0.0)
    assert vals[0] == 1.0
    assert vals[-1] == 0.0


@given(st.floats(min_value=-10.0, max_value=10.0, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_bump_even_and_bounded(t):
    v = float(bump(t))
    assert 0.0 <= v <= 1.0
    assert v == float(bump(-t))
    if abs(t) <= 0.5:
        assert v == 1.0
    if abs(t) >= 1.0:
        assert v == 0.0


def test_bump_delta_scales():
    ts = np.linspace(-0.3, 0.3, 101)
    delta = 0.2
    got = bump_delta(ts, delta)
    want = bump(ts / delta)
    assert np.array_equal(got, want)
    assert bump_delta(0.1, delta) == 1.0
    assert bump_delta(0.2, delta) == 0.0
    with pytest.raises(ValueError):
        bump_delta(ts, 0.0)
    with pytest.raises(ValueError):
        bump_delta(ts, -1.0)


def test_make_time_grid():
    g = make_time_grid(2.0, 9)
    assert len(g) == 9
    assert g[0] == -2.0
    assert g[-1] == 2.0
    assert g[4] == 0.0
    steps = np.diff(g)
    assert np.allclose(steps, steps[0], rtol=0, atol=1e-15)
    with pytest.raises(ValueError):
        make_time_grid(2.0, 8)
    with pytest.raises(ValueError):
        make_time_grid(2.0, 1)
    with pytest.raises(ValueError):
        make_time_grid(0.0, 9)
    with pytest.raises(ValueError):
        make_time_grid(-1.0, 9)


def test_field_shape_validation():
    times = make_time_grid(1.0, 5)
    good = np.zeros((5, 3, 3), dtype=np.complex128)
    fld = SpaceTimeField(torus=T, N=1, times=times, coeffs=good)
    assert fld.dt == pytest.approx(0.5)
    with pytest.raises(ValueError):
        SpaceTimeField(torus=T, N=1, times=times, coeffs=np.zeros((5, 4, 4)))
    with pytest.raises(ValueError):
        SpaceTimeField(torus=T, N=2, times=times, coeffs=good)
    with pytest.raises(ValueError):
        SpaceTimeField(torus=T, N=1, times=times[:1], coeffs=good[:1])


def test_field_grid_validation():
    good = np.zeros((4, 3, 3), dtype=np.complex128)
    with pytest.raises(ValueError):
        SpaceTimeField(torus=T, N=1, times=np.array([0.0, 0.1, 0.3, 0.4]), coeffs=good)
    with pytest.raises(ValueError):
        SpaceTimeField(torus=T, N=1, times=np.array([0.4, 0.3, 0.2, 0.1]), coeffs=good)
    with pytest.raises(ValueError):
        SpaceTimeField(torus=T, N=1, times=np.array([0.0, 0.0, 0.0, 0.0]), coeffs=good)


def test_windowed_field_must_decay_at_edges():
    times = make_time_grid(1.0, 9)
    coeffs = np.ones((9, 3, 3), dtype=np.complex128)
    with pytest.raises(ValueError, match="decay"):
        SpaceTimeField(torus=T, N=1, times=times, coeffs=coeffs, window_applied=True)
    # the all-zero field is trivially windowed
    SpaceTimeField(
        torus=T, N=1, times=times, coeffs=np.zeros_like(coeffs), window_applied=True
    )


def test_apply_window_decays_and_marks():
    times = make_time_grid(1.0, 33)
    coeffs = np.ones((33, 3, 3), dtype=np.complex128)
    raw = SpaceTimeField(torus=T, N=1, times=times, coeffs=coeffs)
    assert not raw.window_applied
    win = raw.apply_window(0.5)
    assert win.window_applied
    assert np.max(np.abs(win.coeffs[0])) <= EDGE_DECAY
    assert np.max(np.abs(win.coeffs[-1])) <= EDGE_DECAY
    # the plateau |t| <= delta/2 is untouched
    mid = np.abs(times) <= 0.25
    assert np.array_equal(win.coeffs[mid], coeffs[mid])
    # the original is unmodified
    assert np.all(raw.coeffs == 1.0)


def test_zeros_and_copy():
    times = make_time_grid(1.0, 5)
    fld = SpaceTimeField.zeros(T, 2, times)
    assert fld.coeffs.shape == (5, 5, 5)
    assert fld.coeffs.dtype == np.complex128
    assert np.all(fld.coeffs == 0.0)
    fld.coeffs[2, 2, 2] = 1.0 + 2.0j
    cp = fld.copy()
    cp.coeffs[2, 2, 2] = 0.0
    cp.times[0] = -9.0
    assert fld.coeffs[2, 2, 2] == 1.0 + 2.0j
    assert fld.times[0] == -1.0


def test_l2_tx_manual():
    times = np.array([0.0, 0.5, 1.0])
    coeffs = np.zeros((3, 3, 3), dtype=np.complex128)
    coeffs[0, 0, 0] = 3.0
    coeffs[1, 1, 2] = 4.0j
    coeffs[2, 2, 1] = -2.0
    fld = SpaceTimeField(torus=T, N=1, times=times, coeffs=coeffs)
    want = math.sqrt(0.5 * (9.0 + 16.0 + 4.0))
    assert fld.l2_tx() == pytest.approx(want, rel=1e-15)
    assert SpaceTimeField.zeros(T, 1, times).l2_tx() == 0.0
