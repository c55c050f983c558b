"""Uniform time grids, the smooth cutoff, and space-time coefficient fields.

The cutoff is the standard bump built from psi(x) = exp(-1/x):

    S(x)   = psi(x) / (psi(x) + psi(1 - x))        (smooth step, S(0)=0, S(1)=1)
    phi(t) = 1                 for |t| <= 1/2
           = S(2*(1 - |t|))    for 1/2 < |t| < 1
           = 0                 for |t| >= 1
    phi_delta(t) = phi(t / delta)

This exact transition formula is part of the interface: any reimplementation
that follows it agrees to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .torus import TorusSpec

__all__ = ["bump", "bump_delta", "make_time_grid", "SpaceTimeField"]

EDGE_DECAY = 1e-12  # windowed fields must decay to this relative level at grid edges


def _psi(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=np.float64)
    pos = x > 0
    with np.errstate(over="ignore", under="ignore"):
        out[pos] = np.exp(-1.0 / x[pos])
    return out


def bump(t) -> np.ndarray:
    """The smooth cutoff, 1 on [-1/2, 1/2] and 0 outside (-1, 1)."""
    t = np.abs(np.asarray(t, dtype=np.float64))
    x = 2.0 * (1.0 - t)  # transition variable, 1 at |t|=1/2 and 0 at |t|=1
    num = _psi(x)
    den = num + _psi(1.0 - x)
    out = np.zeros_like(t)
    inner = t <= 0.5
    out[inner] = 1.0
    trans = (~inner) & (t < 1.0)
    out[trans] = num[trans] / den[trans]
    return out


def bump_delta(t, delta: float) -> np.ndarray:
    """phi(t/delta): 1 on [-delta/2, delta/2], 0 outside (-delta, delta)."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    return bump(np.asarray(t, dtype=np.float64) / delta)


def make_time_grid(t_half: float, samples: int) -> np.ndarray:
    """Uniform grid of an odd number of samples on [-t_half, t_half]; contains 0."""
    if samples < 3 or samples % 2 == 0:
        raise ValueError(f"samples must be odd and >= 3, got {samples}")
    if t_half <= 0:
        raise ValueError(f"t_half must be positive, got {t_half}")
    return np.linspace(-t_half, t_half, samples)


@dataclass
class SpaceTimeField:
    """Coefficients a(n, t_k) on a uniform time grid.

    coeffs has shape (K, 2N+1, 2N+1) with mode n stored at [k, n1+N, n2+N].
    window_applied means a smooth cutoff has already been applied, which the
    discrete time-Fourier analysis requires; such fields must decay below
    EDGE_DECAY (relative) at the first and last time slice.
    """

    torus: TorusSpec
    N: int
    times: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)
    window_applied: bool = False

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=np.float64)
        k = len(self.times)
        side = 2 * self.N + 1
        if self.coeffs.shape != (k, side, side):
            raise ValueError(
                f"coeffs shape {self.coeffs.shape} != (len(times), 2N+1, 2N+1)"
                f" = ({k}, {side}, {side})"
            )
        if k < 2:
            raise ValueError("need at least two time samples")
        steps = np.diff(self.times)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-14):
            raise ValueError("time grid must be uniform")
        if steps[0] <= 0:
            raise ValueError("times must be strictly increasing")
        if self.window_applied:
            peak = float(np.max(np.abs(self.coeffs)))
            edge = float(
                max(np.max(np.abs(self.coeffs[0])), np.max(np.abs(self.coeffs[-1])))
            )
            if peak > 0 and edge > EDGE_DECAY * peak:
                raise ValueError(
                    f"window_applied field does not decay at grid edges "
                    f"(edge/peak = {edge / peak:.3e})"
                )

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def copy(self) -> "SpaceTimeField":
        return replace(self, times=self.times.copy(), coeffs=self.coeffs.copy())

    @classmethod
    def zeros(
        cls, torus: TorusSpec, n: int, times: np.ndarray, window_applied: bool = False
    ) -> "SpaceTimeField":
        side = 2 * n + 1
        return cls(
            torus=torus,
            N=n,
            times=np.asarray(times, dtype=np.float64),
            coeffs=np.zeros((len(times), side, side), dtype=np.complex128),
            window_applied=window_applied,
        )

    def apply_window(self, delta: float) -> "SpaceTimeField":
        """Multiply by phi_delta(t) and mark the window as applied."""
        w = bump_delta(self.times, delta)
        out = self.coeffs * w[:, None, None]
        return replace(self, coeffs=out, window_applied=True)

    def l2_tx(self) -> float:
        """Discrete L^2_{t,x} norm: sqrt(dt * sum_k sum_n |a(n, t_k)|^2)."""
        return float(np.sqrt(self.dt * np.sum(np.abs(self.coeffs) ** 2)))
