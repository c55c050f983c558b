"""Resonance-level counting on the anisotropic frequency lattice.

For a frequency triple (n1, n2, n3) the resonance level is the pairing

    level(n1, n2, n3) = <n2 - n1, n2 - n3> = d1*e1 + gamma*d2*e2,

with d = n2 - n1, e = n2 - n3.  The counting ops fix one or two of the points,
restrict the free points to dyadic shells, and count solutions of
|level - mu| <= W, optionally with the Wick exclusions n2 != n1, n2 != n3.

Each op runs either as a brute-force scan over the whole shell ("oracle") or
through a geometric fast path ("strip" for a fixed difference direction,
"annulus" when the two outer points are fixed).  The fast paths only
*generate candidates* from padded interval arithmetic; every candidate is then
filtered through the same floating-point level predicate the oracle uses, so
the two methods agree exactly, not just approximately.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .torus import TorusSpec, shell_points

__all__ = [
    "ResonanceQuery",
    "CountRecord",
    "FitResult",
    "resonance_level",
    "count_fix12",
    "count_fix23",
    "count_fix13",
    "count_fix1",
    "annulus_arc_count",
    "divisor_pairs",
    "divisor_champions",
    "fit_exponent",
]


# ---------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class ResonanceQuery:
    """Shell scales, level window, torus, and the Wick-exclusion flag.

    Scales of indices that an op pins to explicit points are provenance
    metadata (0 = unspecified); only the scanned indices' scales must be
    powers of two.
    """

    N1: int = 0
    N2: int = 0
    N3: int = 0
    mu: float = 0.0
    W: float = 1.0
    torus: TorusSpec = TorusSpec()
    wick: bool = True

    def __post_init__(self) -> None:
        if self.W < 0:
            raise ValueError(f"window half-width W must be >= 0, got {self.W}")


@dataclass
class CountRecord:
    """A count plus its provenance."""

    query: ResonanceQuery
    fixed: dict[str, tuple[int, int]]
    count: int
    method: str
    elapsed: float
    points: np.ndarray | None = field(default=None, repr=False)


@dataclass
class FitResult:
    """Least-squares line on (log scale, log value) pairs."""

    slope: float
    intercept: float
    r_squared: float
    points: list[tuple[float, float]]  # the (log scale, log value) pairs

    @property
    def prefactor(self) -> float:
        return math.exp(self.intercept)


def _require_scale(value: int, name: str) -> int:
    n = int(value)
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"{name} must be a power-of-two scale >= 1, got {value}")
    return n


# ---------------------------------------------------------------------------
# the shared level predicate
#
# Everything that decides membership goes through _level_values and
# _window_mask with float64 operands in a fixed evaluation order.  Fast paths
# must never decide membership from their own interval algebra.


def _level_values(d1, d2, e1, e2, gamma: float):
    """d1*e1 + gamma*(d2*e2), elementwise, float64."""
    d1 = np.asarray(d1, dtype=np.float64)
    d2 = np.asarray(d2, dtype=np.float64)
    e1 = np.asarray(e1, dtype=np.float64)
    e2 = np.asarray(e2, dtype=np.float64)
    return d1 * e1 + gamma * (d2 * e2)


def _window_mask(levels, mu: float, width: float):
    return np.abs(levels - mu) <= width


def resonance_level(n1, n2, n3, torus: TorusSpec) -> float:
    """<n2 - n1, n2 - n3> for a single triple, same arithmetic as the scans."""
    d1 = float(n2[0] - n1[0])
    d2 = float(n2[1] - n1[1])
    e1 = float(n2[0] - n3[0])
    e2 = float(n2[1] - n3[1])
    return float(_level_values(d1, d2, e1, e2, torus.gamma))


@lru_cache(maxsize=64)
def _shell_cached(scale: int) -> np.ndarray:
    pts = shell_points(scale)
    pts.setflags(write=False)
    return pts


def _shell_mask(xs: np.ndarray, ys: np.ndarray, scale: int) -> np.ndarray:
    """Exact integer membership test for the dyadic shell scale/2 < |n| <= scale."""
    rr = xs.astype(np.int64) ** 2 + ys.astype(np.int64) ** 2
    s2 = int(scale) * int(scale)
    return (4 * rr > s2) & (rr <= s2)


def _enumerate_intervals(lo: np.ndarray, hi: np.ndarray, keys: np.ndarray):
    """All integer pairs (x, keys[i]) with lo[i] <= x <= hi[i] (lo/hi int64)."""
    lens = np.maximum(hi - lo + 1, 0)
    total = int(lens.sum())
    if total == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    starts = np.cumsum(lens) - lens
    xs = np.repeat(lo, lens) + (np.arange(total, dtype=np.int64) - np.repeat(starts, lens))
    ys = np.repeat(keys, lens)
    return xs, ys


# ---------------------------------------------------------------------------
# fix12 / fix23: one difference direction fixed -> strip in the free point


def _scan_pair_mask(n1, n2, xs, ys, mu, width, gamma, exclude_n2: bool):
    """Exact membership of candidate third points (xs, ys), scanned as n3."""
    d1 = float(n2[0] - n1[0])
    d2 = float(n2[1] - n1[1])
    e1 = np.float64(n2[0]) - xs.astype(np.float64)
    e2 = np.float64(n2[1]) - ys.astype(np.float64)
    mask = _window_mask(_level_values(d1, d2, e1, e2, gamma), mu, width)
    if exclude_n2:
        mask &= (xs != n2[0]) | (ys != n2[1])
    return mask


def _inner_oracle(n1, n2, scale, mu, width, gamma, exclude_n2):
    pts = _shell_cached(scale)
    mask = _scan_pair_mask(n1, n2, pts[:, 0], pts[:, 1], mu, width, gamma, exclude_n2)
    return pts, mask


def _inner_strip(n1, n2, scale, mu, width, gamma, exclude_n2):
    """Candidate generation for the strip a*x + b*y in [lo, hi], then exact filter."""
    d1 = n2[0] - n1[0]
    d2 = n2[1] - n1[1]
    if d1 == 0 and d2 == 0:
        # level is identically zero; nothing to solve for
        return _inner_oracle(n1, n2, scale, mu, width, gamma, exclude_n2)
    a = float(d1)
    b = gamma * float(d2)
    c = a * float(n2[0]) + b * float(n2[1])
    lo_val = c - mu - width
    hi_val = c - mu + width
    n = int(scale)
    grid = np.arange(-n, n + 1, dtype=np.int64)
    gridf = grid.astype(np.float64)
    if abs(a) >= abs(b):
        # solve for x given y; |a| >= 1 since d1 is a nonzero integer here
        t1 = (lo_val - b * gridf) / a
        t2 = (hi_val - b * gridf) / a
        solved_lo = np.ceil(np.minimum(t1, t2)).astype(np.int64) - 1
        solved_hi = np.floor(np.maximum(t1, t2)).astype(np.int64) + 1
        xs, ys = _enumerate_intervals(
            np.maximum(solved_lo, -n), np.minimum(solved_hi, n), grid
        )
    else:
        t1 = (lo_val - a * gridf) / b
        t2 = (hi_val - a * gridf) / b
        solved_lo = np.ceil(np.minimum(t1, t2)).astype(np.int64) - 1
        solved_hi = np.floor(np.maximum(t1, t2)).astype(np.int64) + 1
        ys, xs = _enumerate_intervals(
            np.maximum(solved_lo, -n), np.minimum(solved_hi, n), grid
        )
    keep = _shell_mask(xs, ys, scale)
    xs, ys = xs[keep], ys[keep]
    mask = _scan_pair_mask(n1, n2, xs, ys, mu, width, gamma, exclude_n2)
    return np.stack([xs, ys], axis=1), mask


def _as_point(n) -> tuple[int, int]:
    return (int(n[0]), int(n[1]))


def _finish(query, fixed, count, method, t0, points, want_points, width=2):
    rec = CountRecord(
        query=query,
        fixed=fixed,
        count=count,
        method=method,
        elapsed=time.perf_counter() - t0,
    )
    if want_points:
        if points is None or len(points) == 0:
            rec.points = np.empty((0, width), np.int64)
        else:
            pts = np.asarray(points, dtype=np.int64)
            order = np.lexsort(tuple(pts[:, c] for c in range(pts.shape[1] - 1, -1, -1)))
            rec.points = pts[order]
    return rec


def count_fix12(
    n1,
    n2,
    query: ResonanceQuery,
    method: str = "strip",
    return_points: bool = False,
) -> CountRecord:
    """Count n3 in shell(query.N3) with |<n2-n1, n2-n3> - mu| <= W.

    With query.wick the scanned point is excluded from coinciding with n2.
    Rejects n1 == n2: the strip direction degenerates and the constraint
    becomes vacuous or empty.
    """
    if method not in ("strip", "oracle"):
        raise ValueError(f"unknown method {method!r} for count_fix12")
    n1 = _as_point(n1)
    n2 = _as_point(n2)
    if n1 == n2:
        raise ValueError("count_fix12 requires n1 != n2")
    scale = _require_scale(query.N3, "query.N3")
    t0 = time.perf_counter()
    inner = _inner_oracle if method == "oracle" else _inner_strip
    pts, mask = inner(n1, n2, scale, query.mu, query.W, query.torus.gamma, query.wick)
    count = int(np.count_nonzero(mask))
    points = np.asarray(pts)[mask].copy() if (return_points and count) else None
    return _finish(
        query, {"n1": n1, "n2": n2}, count, method, t0, points, return_points
    )


def count_fix23(
    n2,
    n3,
    query: ResonanceQuery,
    method: str = "strip",
    return_points: bool = False,
) -> CountRecord:
    """Count n1 in shell(query.N1); by the symmetry <n2-n1, n2-n3> =
    <n2-n3, n2-n1> this is the count_fix12 kernel with roles (n1, n2) ->
    (n3, n2) and the scan scale taken from query.N1."""
    if method not in ("strip", "oracle"):
        raise ValueError(f"unknown method {method!r} for count_fix23")
    n2 = _as_point(n2)
    n3 = _as_point(n3)
    if n2 == n3:
        raise ValueError("count_fix23 requires n2 != n3")
    scale = _require_scale(query.N1, "query.N1")
    t0 = time.perf_counter()
    inner = _inner_oracle if method == "oracle" else _inner_strip
    pts, mask = inner(n3, n2, scale, query.mu, query.W, query.torus.gamma, query.wick)
    count = int(np.count_nonzero(mask))
    points = np.asarray(pts)[mask].copy() if (return_points and count) else None
    return _finish(
        query, {"n2": n2, "n3": n3}, count, method, t0, points, return_points
    )


# ---------------------------------------------------------------------------
# fix13: outer points fixed -> annulus in n2


def _mid_mask(n1, n3, xs, ys, mu, width, gamma, wick):
    """Exact membership of candidate middle points (xs, ys), scanned as n2."""
    d1 = xs.astype(np.float64) - np.float64(n1[0])
    d2 = ys.astype(np.float64) - np.float64(n1[1])
    e1 = xs.astype(np.float64) - np.float64(n3[0])
    e2 = ys.astype(np.float64) - np.float64(n3[1])
    mask = _window_mask(_level_values(d1, d2, e1, e2, gamma), mu, width)
    if wick:
        mask &= (xs != n1[0]) | (ys != n1[1])
        mask &= (xs != n3[0]) | (ys != n3[1])
    return mask


def _mid_annulus(n1, n3, scale, mu, width, gamma):
    """Candidates for Q(n2 - c) in [q0 + mu - W, q0 + mu + W], c the midpoint.

    The identity <n2-n1, n2-n3> = Q(n2-c) - Q(n1-n3)/4 turns the level window
    into an elliptic annulus around c = (n1+n3)/2.
    """
    cx = (n1[0] + n3[0]) / 2.0
    cy = (n1[1] + n3[1]) / 2.0
    q0 = ((n1[0] - n3[0]) ** 2 + gamma * (n1[1] - n3[1]) ** 2) / 4.0
    r2_hi = q0 + mu + width
    r2_lo = q0 + mu - width
    n = int(scale)
    if r2_hi < 0.0:
        r2_hi = 0.0
    half_x = math.sqrt(r2_hi)
    x_lo = max(math.ceil(cx - half_x) - 1, -n)
    x_hi = min(math.floor(cx + half_x) + 1, n)
    if x_lo > x_hi:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    xs_axis = np.arange(x_lo, x_hi + 1, dtype=np.int64)
    dx2 = (xs_axis.astype(np.float64) - cx) ** 2
    rem_hi = np.maximum(r2_hi - dx2, 0.0)
    rem_lo = np.maximum(r2_lo - dx2, 0.0)
    t_hi = np.sqrt(rem_hi / gamma)
    t_lo = np.sqrt(rem_lo / gamma)
    up_lo = np.ceil(cy + t_lo).astype(np.int64) - 1
    up_hi = np.floor(cy + t_hi).astype(np.int64) + 1
    dn_lo = np.ceil(cy - t_hi).astype(np.int64) - 1
    dn_hi = np.floor(cy - t_lo).astype(np.int64) + 1
    # merge the two symmetric y-intervals when padding makes them touch
    merged = dn_hi >= up_lo - 1
    up_lo_eff = np.where(merged, dn_lo, up_lo)
    ys_a, xs_a = _enumerate_intervals(
        np.maximum(up_lo_eff, -n), np.minimum(up_hi, n), xs_axis
    )
    ys_b, xs_b = _enumerate_intervals(
        np.maximum(np.where(merged, 1, dn_lo), -n),
        np.minimum(np.where(merged, 0, dn_hi), n),
        xs_axis,
    )
    return np.concatenate([xs_a, xs_b]), np.concatenate([ys_a, ys_b])


def count_fix13(
    n1,
    n3,
    query: ResonanceQuery,
    method: str = "annulus",
    return_points: bool = False,
) -> CountRecord:
    """Count n2 in shell(query.N2) with |<n2-n1, n2-n3> - mu| <= W."""
    if method not in ("annulus", "oracle"):
        raise ValueError(f"unknown method {method!r} for count_fix13")
    n1 = _as_point(n1)
    n3 = _as_point(n3)
    scale = _require_scale(query.N2, "query.N2")
    gamma = query.torus.gamma
    t0 = time.perf_counter()
    if method == "oracle":
        pts = _shell_cached(scale)
        xs, ys = pts[:, 0], pts[:, 1]
    else:
        xs, ys = _mid_annulus(n1, n3, scale, query.mu, query.W, gamma)
        keep = _shell_mask(xs, ys, scale)
        xs, ys = xs[keep], ys[keep]
    mask = _mid_mask(n1, n3, xs, ys, query.mu, query.W, gamma, query.wick)
    count = int(np.count_nonzero(mask))
    points = None
    if return_points and count:
        points = np.stack([xs, ys], axis=1)[mask].copy()
    return _finish(
        query, {"n1": n1, "n3": n3}, count, method, t0, points, return_points
    )


# ---------------------------------------------------------------------------
# fix1: only the first point fixed -> sum of strips over n2


def count_fix1(
    n1,
    query: ResonanceQuery,
    method: str = "strip",
    return_points: bool = False,
) -> CountRecord:
    """Count pairs (n2, n3) in shell(query.N2) x shell(query.N3) in the window.

    Fast path: one strip count per n2.  return_points yields (M, 4) rows
    (n2x, n2y, n3x, n3y).
    """
    if method not in ("strip", "oracle"):
        raise ValueError(f"unknown method {method!r} for count_fix1")
    n1 = _as_point(n1)
    scale2 = _require_scale(query.N2, "query.N2")
    scale3 = _require_scale(query.N3, "query.N3")
    t0 = time.perf_counter()
    inner = _inner_oracle if method == "oracle" else _inner_strip
    mids = _shell_cached(scale2)
    total = 0
    rows: list[np.ndarray] = []
    for mid in mids:
        n2 = (int(mid[0]), int(mid[1]))
        if query.wick and n2 == n1:
            continue
        pts, mask = inner(
            n1, n2, scale3, query.mu, query.W, query.torus.gamma, query.wick
        )
        c = int(np.count_nonzero(mask))
        total += c
        if return_points and c:
            sel = np.asarray(pts)[mask]
            rows.append(np.hstack([np.broadcast_to(mid, (c, 2)), sel]))
    points = None
    if return_points:
        points = np.vstack(rows).astype(np.int64) if rows else None
    return _finish(
        query, {"n1": n1}, total, method, t0, points, return_points, width=4
    )


# ---------------------------------------------------------------------------
# stretched-lattice annulus arcs


def _arc_mask(xs, ys, radius, thickness_coeff, theta0, theta, gamma):
    """Exact membership in the annulus-arc for stretched points (m1, gamma*m2)."""
    px = xs.astype(np.float64)
    py = gamma * ys.astype(np.float64)
    r = np.hypot(px, py)
    mask = np.abs(r - radius) <= thickness_coeff / radius
    mask &= r > 0.0
    if theta < 2.0 * math.pi:
        ang = np.arctan2(py, px)
        rel = np.mod(ang - (theta0 - theta / 2.0), 2.0 * math.pi)
        mask &= rel <= theta
    return mask


def annulus_arc_count(
    radius: float,
    thickness_coeff: float,
    arc_angle: float,
    center_angle: float,
    torus: TorusSpec,
    method: str = "box",
) -> int:
    """Number of stretched-lattice points (m1, gamma*m2) whose Euclidean
    distance to the circle of radius R is <= c/R and whose angular coordinate
    lies in the arc of width arc_angle centered at center_angle.

    "oracle" scans the full annulus bounding box; "box" restricts to a padded
    bounding box of the arc (identical counts, same membership predicate).
    """
    if method not in ("box", "oracle"):
        raise ValueError(f"unknown method {method!r} for annulus_arc_count")
    if not (radius > 0 and thickness_coeff > 0):
        raise ValueError("need radius > 0 and thickness_coeff > 0")
    if not (0 < arc_angle <= 2.0 * math.pi):
        raise ValueError("arc_angle must lie in (0, 2*pi]")
    gamma = torus.gamma
    r_out = radius + thickness_coeff / radius
    if method == "oracle" or arc_angle > math.pi / 2.0:
        mx = math.floor(r_out) + 1
        my = math.floor(r_out / gamma) + 1
        gx = np.arange(-mx, mx + 1, dtype=np.int64)
        gy = np.arange(-my, my + 1, dtype=np.int64)
    else:
        # bounding box of the arc from sampled boundary points, padded by 2
        phis = center_angle + np.linspace(-0.5, 0.5, 65) * arc_angle
        r_in = max(radius - thickness_coeff / radius, 0.0)
        bx = np.concatenate([r_in * np.cos(phis), r_out * np.cos(phis)])
        by = np.concatenate([r_in * np.sin(phis), r_out * np.sin(phis)])
        gx = np.arange(
            math.floor(bx.min()) - 2, math.ceil(bx.max()) + 3, dtype=np.int64
        )
        gy = np.arange(
            math.floor(by.min() / gamma) - 2,
            math.ceil(by.max() / gamma) + 3,
            dtype=np.int64,
        )
    xs, ys = [a.ravel() for a in np.meshgrid(gx, gy, indexing="ij")]
    mask = _arc_mask(xs, ys, radius, thickness_coeff, center_angle, arc_angle, gamma)
    return int(np.count_nonzero(mask))


# ---------------------------------------------------------------------------
# divisor counting


def divisor_pairs(m: int) -> int:
    """Number of ordered integer pairs (a, b), signs included, with a*b = m."""
    m = int(m)
    if m == 0:
        raise ValueError("a*b = 0 has infinitely many integer solutions")
    n = abs(m)
    count = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            count *= e + 1
        p += 1 if p == 2 else 2
    if n > 1:
        count *= 2
    return 2 * count


def divisor_champions(limit: int) -> list[tuple[int, int]]:
    """Running maxima of divisor_pairs over 1..limit via a sieve.

    Returns (n, divisor_pairs(n)) at every n where the running max increases.
    """
    limit = int(limit)
    counts = np.zeros(limit + 1, dtype=np.int32)
    for i in range(1, limit + 1):
        counts[i::i] += 1
    pairs = 2 * counts[1:]
    cummax = np.maximum.accumulate(pairs)
    prev = np.concatenate([[0], cummax[:-1]])
    idx = np.nonzero(pairs > prev)[0]
    return [(int(i + 1), int(pairs[i])) for i in idx]


# ---------------------------------------------------------------------------
# power-law fits


def fit_exponent(points: Iterable[Sequence[float]]) -> FitResult:
    """Least-squares fit of log value against log scale over (scale, value) pairs."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 2:
        raise ValueError("need at least two points to fit an exponent")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("fit_exponent needs strictly positive scales and values")
    lx = np.log(xs)
    ly = np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_res = float(np.dot(resid, resid))
    centered = ly - ly.mean()
    ss_tot = float(np.dot(centered, centered))
    if ss_tot < 1e-300:
        r2 = 1.0 if ss_res < 1e-12 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return FitResult(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=float(r2),
        points=[(float(a), float(b)) for a, b in zip(lx, ly)],
    )
