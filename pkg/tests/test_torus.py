"""Quadratic form, pairing, shells, and gamma handling."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wicktorus.torus import (
    GAMMA_PRESETS,
    TorusSpec,
    ball_points,
    dyadic_scales,
    resolve_gamma,
    shell_points,
    shell_scale_of,
)

SQRT2 = 1.41421356237

ints = st.integers(min_value=-50, max_value=50)


def test_qform_examples():
    assert TorusSpec(1.5).qform((1, 0)) == 1.0
    assert TorusSpec(1.5).qform((0, 2)) == 6.0
    assert TorusSpec(SQRT2).qform((3, -2)) == pytest.approx(14.65685424948, abs=1e-11)


def test_pairing_examples():
    assert TorusSpec(2.0).pairing((1, 0), (0, 1)) == 0.0
    assert TorusSpec(1.5).pairing((1, 1), (1, 1)) == 2.5
    assert TorusSpec(SQRT2).pairing((2, -1), (1, 3)) == pytest.approx(
        -2.24264068711, abs=1e-11
    )


@given(m1=ints, m2=ints, k1=ints, k2=ints, l1=ints, l2=ints)
@settings(max_examples=200)
def test_pairing_bilinear_symmetric(m1, m2, k1, k2, l1, l2):
    t = TorusSpec(SQRT2)
    m, k, l = (m1, m2), (k1, k2), (l1, l2)
    assert t.pairing(m, k) == t.pairing(k, m)
    lhs = t.pairing((m1 + l1, m2 + l2), k)
    rhs = t.pairing(m, k) + t.pairing(l, k)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)


@given(m1=ints, m2=ints, k1=ints, k2=ints)
@settings(max_examples=200)
def test_polarization(m1, m2, k1, k2):
    t = TorusSpec(GAMMA_PRESETS["golden"])
    q = t.qform((m1 + k1, m2 + k2)) - t.qform((m1, m2)) - t.qform((k1, k2))
    p = 2.0 * t.pairing((m1, m2), (k1, k2))
    assert q == pytest.approx(p, rel=1e-12, abs=1e-9)


def test_shell_sizes():
    assert len(shell_points(1)) == 4
    assert len(shell_points(2)) == 8
    assert len(shell_points(4)) == 36
    assert len(shell_points(8)) == 148
    pts = {tuple(p) for p in shell_points(2)}
    assert pts == {(1, 1), (1, -1), (-1, 1), (-1, -1), (2, 0), (-2, 0), (0, 2), (0, -2)}


def test_ball_is_union_of_shells():
    for n in (1, 2, 4, 8, 16):
        total = sum(len(shell_points(s)) for s in dyadic_scales(1, n))
        assert total == (len(ball_points(n)))
        assert total == np.sum(
            np.hypot(*np.mgrid[-n : n + 1, -n : n + 1]) <= n
        ) - 1  # closed Euclidean ball minus the origin


def test_shell_partition_unique():
    n = 16
    seen = {}
    for s in dyadic_scales(1, n):
        for p in shell_points(s):
            key = (int(p[0]), int(p[1]))
            assert key not in seen
            seen[key] = s
    for p, s in seen.items():
        assert shell_scale_of(p) == s
        r = np.hypot(*p)
        if s == 1:
            assert 0 < r <= 1
        else:
            assert s / 2 < r <= s


def test_shell_points_lexicographic():
    for s in (1, 2, 4, 8):
        pts = shell_points(s)
        assert [tuple(p) for p in pts] == sorted(tuple(p) for p in pts)


def test_shell_points_rejects_non_dyadic():
    with pytest.raises(ValueError):
        shell_points(3)
    with pytest.raises(ValueError):
        shell_points(0)


def test_resolve_gamma():
    assert resolve_gamma("sqrt2") == GAMMA_PRESETS["sqrt2"] == SQRT2
    assert resolve_gamma("square") == 1.0
    assert resolve_gamma("golden") == 1.61803398875
    assert resolve_gamma("threehalves") == 1.5
    assert resolve_gamma("2.25") == 2.25
    assert resolve_gamma(1.25) == 1.25
    with pytest.raises(ValueError):
        resolve_gamma("nosuchpreset")
    with pytest.raises(ValueError):
        resolve_gamma(-1.0)
    with pytest.raises(ValueError):
        resolve_gamma("0.0")


def test_gamma_str_significant_digits_and_roundtrip():
    for gamma in (SQRT2, 1.0, 1.5, 1.61803398875, 2.7, 0.75):
        s = TorusSpec(gamma).gamma_str
        digits = sum(ch.isdigit() for ch in s.partition("e")[0].lstrip("-0."))
        assert digits >= 11, s
        assert float(s) == gamma


def test_gamma_str_examples():
    assert TorusSpec(SQRT2).gamma_str == "1.41421356237"
    assert TorusSpec(1.0).gamma_str == "1.0000000000"
    assert TorusSpec(1.5).gamma_str == "1.5000000000"


def test_dyadic_scales():
    assert dyadic_scales(4, 64) == [4, 8, 16, 32, 64]
    assert dyadic_scales(1, 1) == [1]
    assert dyadic_scales(3, 12) == [4, 8]
    assert dyadic_scales(9, 8) == []
