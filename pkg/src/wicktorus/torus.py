"""Anisotropic frequency lattice for the torus with quadratic form Q(n) = n1^2 + gamma*n2^2.

All geometry in this package lives on the frequency side: a "point" is a pair
of exact integers n = (n1, n2), the dispersion relation is the quadratic form
Q_gamma, and the associated bilinear pairing is <m, k> = m1*k1 + gamma*m2*k2.
Truncation balls and dyadic shells are measured in the *Euclidean* length
|n| = sqrt(n1^2 + n2^2), independent of gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GAMMA_PRESETS",
    "TorusSpec",
    "resolve_gamma",
    "shell_points",
    "ball_points",
    "shell_scale_of",
    "dyadic_scales",
]

# Anisotropy presets: two truncated irrationals and two exact rationals for
# rational/irrational comparison runs.
GAMMA_PRESETS: dict[str, float] = {
    "sqrt2": 1.41421356237,
    "golden": 1.61803398875,
    "square": 1.0,
    "threehalves": 1.5,
}


def resolve_gamma(spec: str | float) -> float:
    """Map a preset name or a numeric literal (str or float) to a gamma value."""
    if isinstance(spec, str) and spec in GAMMA_PRESETS:
        return GAMMA_PRESETS[spec]
    try:
        value = float(spec)
    except ValueError:
        raise ValueError(
            f"gamma {spec!r} is neither a preset {sorted(GAMMA_PRESETS)} nor a float"
        ) from None
    if not (value > 0.0 and math.isfinite(value)):
        raise ValueError(f"gamma must be positive and finite, got {value}")
    return value


@dataclass(frozen=True)
class TorusSpec:
    """Anisotropy parameter of the lattice; hashable so fields can carry it."""

    gamma: float = GAMMA_PRESETS["sqrt2"]

    def __post_init__(self) -> None:
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be positive and finite, got {self.gamma}")

    @property
    def gamma_str(self) -> str:
        # Output records carry gamma as a decimal string with at least 11
        # significant digits that parses back to the exact float64 value.
        # repr is the shortest round-trip form; pad trailing zeros (value
        # unchanged) when it is shorter than 11 significant digits.
        s = repr(self.gamma)
        mant, _, exp = s.partition("e")
        digits = sum(ch.isdigit() for ch in mant.lstrip("-0."))
        if digits >= 11:
            return s
        if "." not in mant:
            mant += "."
        mant += "0" * (11 - digits)
        return mant + (("e" + exp) if exp else "")

    def qform(self, n) -> float:
        """Q(n) = n1^2 + gamma*n2^2 for a single point n = (n1, n2)."""
        # gamma multiplies the exact integer product so that the scalar and
        # vectorized forms round identically
        return float(n[0]) * float(n[0]) + self.gamma * (float(n[1]) * float(n[1]))

    def pairing(self, m, k) -> float:
        """Bilinear form <m, k> = m1*k1 + gamma*m2*k2 (polarization of Q)."""
        # same association as qform/pairing_many; also makes the form exactly
        # symmetric (the integer product m2*k2 is formed before scaling)
        return float(m[0]) * float(k[0]) + self.gamma * (float(m[1]) * float(k[1]))

    def qform_many(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized Q over an (M, 2) integer array."""
        p = np.asarray(pts, dtype=np.float64)
        return p[..., 0] ** 2 + self.gamma * p[..., 1] ** 2

    def pairing_many(self, m: np.ndarray, k: np.ndarray) -> np.ndarray:
        """Vectorized <m, k> over broadcastable (..., 2) float or int arrays."""
        m = np.asarray(m, dtype=np.float64)
        k = np.asarray(k, dtype=np.float64)
        return m[..., 0] * k[..., 0] + self.gamma * (m[..., 1] * k[..., 1])


def _lex_sorted(pts: np.ndarray) -> np.ndarray:
    """Sort an (M, 2) array lexicographically by (n1, n2)."""
    if len(pts) == 0:
        return pts.reshape(0, 2)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    return pts[order]


def _disk_points(radius: int, r2_min: float) -> np.ndarray:
    """Integer points with r2_min < n1^2 + n2^2 <= radius^2, lex order.

    The comparison 4*(n1^2+n2^2) > 4*r2_min is done in exact integer
    arithmetic (dyadic lower bounds N^2/4 make 4*r2_min an integer).
    """
    n = int(radius)
    g = np.arange(-n, n + 1, dtype=np.int64)
    x, y = np.meshgrid(g, g, indexing="ij")
    rr4 = 4 * (x * x + y * y)
    lo4 = int(round(4 * r2_min))
    keep = (rr4 > lo4) & (rr4 <= 4 * n * n)
    pts = np.stack([x[keep], y[keep]], axis=1)
    return _lex_sorted(pts)


def shell_points(scale: int) -> np.ndarray:
    """Integer points of the dyadic shell scale/2 < |n| <= scale (Euclidean).

    scale must be a power of two; the smallest shell (scale 1) is the set
    {0 < |n| <= 1} of the four unit vectors.  Returns an (M, 2) int64 array in
    lexicographic order.
    """
    n = int(scale)
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"shell scale must be a power of two >= 1, got {scale}")
    lo = 0.0 if n == 1 else (n * n) / 4.0
    return _disk_points(n, lo)


def ball_points(radius: int, include_origin: bool = False) -> np.ndarray:
    """Integer points with 0 < |n| <= radius (optionally including the origin)."""
    n = int(radius)
    if n < 1:
        raise ValueError(f"ball radius must be >= 1, got {radius}")
    pts = _disk_points(n, 0.0)
    if include_origin:
        pts = _lex_sorted(np.vstack([pts, np.zeros((1, 2), dtype=np.int64)]))
    return pts


def shell_scale_of(n) -> int:
    """Dyadic scale of the shell containing n: smallest power of two >= |n|."""
    r2 = int(n[0]) * int(n[0]) + int(n[1]) * int(n[1])
    if r2 == 0:
        raise ValueError("the origin belongs to no dyadic shell")
    scale = 1
    while scale * scale < r2:
        scale *= 2
    return scale


def dyadic_scales(lo: int, hi: int) -> list[int]:
    """Powers of two in [lo, hi], ascending."""
    out = []
    s = 1
    while s <= hi:
        if s >= lo:
            out.append(s)
        s *= 2
    return out
