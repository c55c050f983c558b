"""Reproducible Gaussian data and its probabilistic diagnostics.

Randomness is counter-based: every coefficient is a pure function of
(seed, n1, n2, component), so samples are independent of evaluation order,
chunking, and worker count. The generator is pinned by prng_id and must never
change behind an existing id.

    splitmix64-ndtri-v1:
      h = mix64(seed ^ 0x9E3779B97F4A7C15)
      h = mix64(h ^ u64(n1)); h = mix64(h ^ u64(n2)); h = mix64(h ^ component)
      u = ((h >> 11) + 0.5) * 2**-53          in (0, 1)
      z = ndtri(u)                             standard normal
      g(n) = (z_re + i z_im) / sqrt(2)         components 0 and 1

    mix64(x): x ^= x >> 30; x *= 0xBF58476D1CE4E5B9;
              x ^= x >> 27; x *= 0x94D049BB133111EB; x ^= x >> 31

g(n) is standard complex Gaussian: E g = 0, E g^2 = 0, E |g|^2 = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import NamedTuple

import numpy as np
from scipy.special import ndtri

from .counting import FitResult, fit_exponent
from .spectral import SpectralField, _phys
from .torus import TorusSpec

__all__ = [
    "PRNG_ID",
    "GaussianEnsemble",
    "sample_data",
    "SupEstimate",
    "sup_norm",
    "linf_scan",
    "chaos_l2_norm",
    "chaos_tail",
    "TailReport",
]

PRNG_ID = "splitmix64-ndtri-v1"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _mix64(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):  # uint64 arithmetic is modular by design
        x = x ^ (x >> np.uint64(30))
        x = x * _MIX1
        x = x ^ (x >> np.uint64(27))
        x = x * _MIX2
        x = x ^ (x >> np.uint64(31))
    return x


def _u64(values) -> np.ndarray:
    return np.asarray(values, dtype=np.int64).astype(np.uint64)


def _uniforms(seed, n1, n2, component: int) -> np.ndarray:
    """Order-independent uniforms in (0, 1); inputs broadcast together."""
    h = _mix64(_u64(seed) ^ _GOLDEN)
    h = _mix64(h ^ _u64(n1))
    h = _mix64(h ^ _u64(n2))
    h = _mix64(h ^ np.uint64(component))
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


@dataclass(frozen=True)
class GaussianEnsemble:
    """A reproducible family {g(n)} of standard complex Gaussians."""

    seed: int
    torus: TorusSpec = dc_field(default_factory=TorusSpec)
    prng_id: str = PRNG_ID

    def __post_init__(self) -> None:
        if self.prng_id != PRNG_ID:
            raise ValueError(f"unknown prng_id {self.prng_id!r}; known: {PRNG_ID!r}")

    def gaussians(self, points: np.ndarray, seed=None) -> np.ndarray:
        """g(n) for an (M, 2) array of modes; optional seed array broadcasts."""
        pts = np.asarray(points, dtype=np.int64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must have shape (M, 2), got {pts.shape}")
        s = self.seed if seed is None else seed
        u_re = _uniforms(s, pts[:, 0], pts[:, 1], 0)
        u_im = _uniforms(s, pts[:, 0], pts[:, 1], 1)
        return (ndtri(u_re) + 1j * ndtri(u_im)) / np.sqrt(2.0)

    def gaussian(self, n: tuple[int, int]) -> complex:
        return complex(self.gaussians(np.array([n]))[0])


def sample_data(ensemble: GaussianEnsemble, n: int) -> SpectralField:
    """Random data a_m = g(m) / |m| (Euclidean) on 0 < |m| <= n, zero mode 0."""
    field = SpectralField(torus=ensemble.torus, N=n)
    pts = field.support_points()
    g = ensemble.gaussians(pts)
    radii = np.sqrt(pts[:, 0] ** 2 + pts[:, 1] ** 2).astype(np.float64)
    field.coeffs[pts[:, 0] + n, pts[:, 1] + n] = g / radii
    return field


class SupEstimate(NamedTuple):
    """Grid sup plus a rigorous continuum correction:
    value <= true sup <= value + pad."""

    value: float
    pad: float


def sup_norm(u: SpectralField, oversample: int = 4) -> SupEstimate:
    """Certified estimate of sup_x |u(x)| by oversampled grid evaluation.

    pad = (sqrt(2) pi / G) * sum |a_n| |n| bounds the variation of u between
    grid points via the gradient.
    """
    if oversample < 2:
        raise ValueError("oversample must be >= 2")
    grid = oversample * (2 * u.N + 1)
    phys = _phys(u.coeffs, grid)
    value = float(np.max(np.abs(phys)))
    idx = np.arange(-u.N, u.N + 1, dtype=np.float64)
    norms = np.sqrt(idx[:, None] ** 2 + idx[None, :] ** 2)
    pad = float(np.sqrt(2.0) * np.pi / grid * np.sum(np.abs(u.coeffs) * norms))
    return SupEstimate(value=value, pad=pad)


def linf_scan(
    n_list: list[int],
    seeds: list[int],
    torus: TorusSpec | None = None,
    oversample: int = 4,
    workers: int = 1,
) -> dict:
    """Sup norms of sampled data across truncations and seeds.

    Returns per-(N, seed) values, the median and 99th-percentile profiles,
    log-log fits of each profile, and split fits over the lower and upper
    halves of the scale list (growth should flatten as N increases).
    """
    if torus is None:
        torus = TorusSpec()
    values = np.zeros((len(n_list), len(seeds)))

    def cell(i: int, j: int) -> None:
        fld = sample_data(GaussianEnsemble(seeds[j], torus), n_list[i])
        values[i, j] = sup_norm(fld, oversample).value

    jobs = [(i, j) for i in range(len(n_list)) for j in range(len(seeds))]
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as ex:
            list(ex.map(lambda ij: cell(*ij), jobs))
    else:
        for i, j in jobs:
            cell(i, j)

    med = np.median(values, axis=1)
    p99 = np.percentile(values, 99, axis=1)
    half = max(2, len(n_list) // 2 + (len(n_list) % 2))
    out = {
        "n_list": list(n_list),
        "seeds": list(seeds),
        "values": values,
        "median": fit_exponent(zip(n_list, med)),
        "p99": fit_exponent(zip(n_list, p99)),
    }
    if len(n_list) >= 4:
        out["median_lo"] = fit_exponent(zip(n_list[:half], med[:half]))
        out["median_hi"] = fit_exponent(zip(n_list[-half:], med[-half:]))
    return out


def _clean_tensor(k: int, tensor: np.ndarray, m: int) -> np.ndarray:
    arr = np.array(tensor, dtype=np.complex128, copy=True)
    if arr.shape != (m,) * k:
        raise ValueError(f"tensor shape {arr.shape} != {(m,) * k}")
    if k >= 2:  # products use distinct modes only; self-pairings are excluded
        idx = np.arange(m)
        if k == 2:
            arr[idx, idx] = 0.0
        else:
            arr[idx, idx, :] = 0.0
            arr[idx, :, idx] = 0.0
            arr[:, idx, idx] = 0.0
    return arr


def chaos_l2_norm(k: int, tensor: np.ndarray) -> float:
    """L^2 norm of F_k = sum c_{m...} g_{m1} ... g_{mk} over distinct modes.

    Closed forms (standard complex Gaussians, diagonal entries dropped):
      k=1: sum |c|^2
      k=2: sum |c_ab|^2 + Re sum c_ab conj(c_ba)
      k=3: sum over all 6 axis permutations of c * conj(c permuted)
    """
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2, or 3")
    arr = _clean_tensor(k, np.asarray(tensor), np.asarray(tensor).shape[0])
    if k == 1:
        total = float(np.sum(np.abs(arr) ** 2))
    elif k == 2:
        total = float(np.sum(np.abs(arr) ** 2) + np.real(np.sum(arr * np.conj(arr.T))))
    else:
        total = 0.0
        from itertools import permutations

        for perm in permutations((0, 1, 2)):
            total += float(np.real(np.sum(arr * np.conj(np.transpose(arr, perm)))))
    if total < 0:
        total = 0.0
    return float(np.sqrt(total))


@dataclass
class TailReport:
    """Empirical tail of |F_k| against its sub-Gaussian/Weibull bound curve."""

    k: int
    lambda_grid: np.ndarray
    empirical_tail: np.ndarray
    counts: np.ndarray
    trials: int
    l2_norm: float
    bound_constant: float
    bound_curve: np.ndarray
    seed: int
    prng_id: str
    gamma_str: str


def chaos_tail(
    k: int,
    points: np.ndarray,
    tensor: np.ndarray,
    lambda_grid: np.ndarray,
    trials: int,
    seed: int = 0,
    bound_constant: float = 4.0,
    torus: TorusSpec | None = None,
    block: int = 4096,
) -> TailReport:
    """Monte Carlo tail P(|F_k| > lambda) with the bound
    exp(1 - (lambda / ||F_k||)^{2/k} / bound_constant).

    Trial t draws its Gaussians from seed + t, so the estimate is independent
    of blocking and reproducible coefficient by coefficient.
    """
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2, or 3")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if torus is None:
        torus = TorusSpec()
    pts = np.asarray(points, dtype=np.int64)
    m = pts.shape[0]
    arr = _clean_tensor(k, tensor, m)
    lam = np.asarray(lambda_grid, dtype=np.float64)
    l2 = chaos_l2_norm(k, arr)
    ens = GaussianEnsemble(seed, torus)

    counts = np.zeros(len(lam), dtype=np.int64)
    for lo in range(0, trials, block):
        hi = min(lo + block, trials)
        trial_seeds = seed + np.arange(lo, hi, dtype=np.int64)
        g = ens.gaussians(pts, seed=trial_seeds[:, None])  # (B, M)
        if k == 1:
            vals = g @ arr
        elif k == 2:
            vals = np.einsum("bm,mn,bn->b", g, arr, g, optimize=True)
        else:
            vals = np.einsum("bm,mnp,bn,bp->b", g, arr, g, g, optimize=True)
        counts += (np.abs(vals)[:, None] > lam[None, :]).sum(axis=0)

    tail = counts / float(trials)
    with np.errstate(divide="ignore"):
        ratio = np.where(l2 > 0, lam / max(l2, 1e-300), np.inf)
        bound = np.exp(1.0 - ratio ** (2.0 / k) / bound_constant)
    return TailReport(
        k=k,
        lambda_grid=lam,
        empirical_tail=tail,
        counts=counts,
        trials=trials,
        l2_norm=l2,
        bound_constant=bound_constant,
        bound_curve=bound,
        seed=seed,
        prng_id=ens.prng_id,
        gamma_str=torus.gamma_str,
    )
