"""Uniformly sampled signals on an interval (1D) or rectangle (2D).

GridSignal is the discretization carrier shared by the bump construction,
the Fourier analysis, and the time-frequency scan.  Compactly supported
signals vanish at the grid boundary, so the rectangle sum dx * sum(samples)
and the trapezoid rule agree; integral() uses the rectangle sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError


@dataclass(frozen=True)
class GridSpec:
    """Requested sampling grid: n points uniformly spaced on [lo, hi]."""

    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if not (self.hi > self.lo):
            raise ContractError(f"need hi > lo, got [{self.lo}, {self.hi}]")
        if self.n < 16:
            raise ContractError(f"need at least 16 samples, got {self.n}")

    @property
    def dx(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    def x(self) -> np.ndarray:
        return self.lo + self.dx * np.arange(self.n)


def symmetric_grid(halfwidth: float, dx: float) -> GridSpec:
    """Odd-length grid centered at 0 covering [-halfwidth, halfwidth]."""
    m = int(math.ceil(halfwidth / dx))
    return GridSpec(lo=-m * dx, hi=m * dx, n=2 * m + 1)


@dataclass(frozen=True)
class GridSignal:
    """Samples on a uniform grid; origin is the coordinate of samples[0].

    samples may be real or complex and 1D or 2D (square cells in 2D, origin
    then being the coordinate pair of samples[0, 0]).  Instances are
    immutable; derived signals are new objects.
    """

    samples: np.ndarray
    dx: float
    origin: float | tuple[float, float]

    def __post_init__(self):
        arr = np.asarray(self.samples)
        object.__setattr__(self, "samples", arr)
        if arr.ndim not in (1, 2):
            raise ContractError(f"samples must be 1D or 2D, got ndim={arr.ndim}")
        if arr.size < 16:
            raise ContractError("signal must have at least 16 samples")
        if not self.dx > 0:
            raise ContractError(f"dx must be positive, got {self.dx}")

    @property
    def dims(self) -> int:
        return self.samples.ndim

    def x(self) -> np.ndarray:
        if self.dims != 1:
            raise ContractError("x() is defined for 1D signals")
        return float(self.origin) + self.dx * np.arange(len(self.samples))

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        if self.dims != 2:
            raise ContractError("axes() is defined for 2D signals")
        ox, oy = self.origin
        nx, ny = self.samples.shape
        return (ox + self.dx * np.arange(nx), oy + self.dx * np.arange(ny))

    def integral(self) -> float:
        return float(np.sum(self.samples.real) * self.dx**self.dims)

    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.dx**self.dims)

    def support_interval(self, rel_tol: float = 1e-12) -> tuple[float, float]:
        """Smallest coordinate interval holding all samples above rel_tol * peak."""
        if self.dims != 1:
            raise ContractError("support_interval() is defined for 1D signals")
        mag = np.abs(self.samples)
        peak = mag.max()
        if peak == 0.0:
            return (0.0, 0.0)
        idx = np.nonzero(mag > rel_tol * peak)[0]
        xs = self.x()
        return (float(xs[idx[0]]), float(xs[idx[-1]]))

    def restrict(self, lo: float, hi: float) -> "GridSignal":
        """Sub-signal over grid points with lo <= x <= hi."""
        xs = self.x()
        mask = (xs >= lo - 1e-12) & (xs <= hi + 1e-12)
        if mask.sum() < 16:
            raise ContractError("restriction leaves fewer than 16 samples")
        i0 = int(np.argmax(mask))
        return GridSignal(self.samples[mask], self.dx, float(xs[i0]))


def from_function(func, spec: GridSpec) -> GridSignal:
    """Sample a scalar function on the grid."""
    xs = spec.x()
    return GridSignal(np.asarray([func(v) for v in xs], dtype=float), spec.dx, spec.lo)


def convolve(f: GridSignal, g: GridSignal) -> GridSignal:
    """Integral convolution (f * g)(x) ~ sum f(t) g(x - t) dx on matching grids."""
    if f.dims != 1 or g.dims != 1:
        raise ContractError("convolve() handles 1D signals")
    if abs(f.dx - g.dx) > 1e-12 * f.dx:
        raise ContractError("grid spacings differ")
    samples = np.convolve(f.samples, g.samples) * f.dx
    return GridSignal(samples, f.dx, float(f.origin) + float(g.origin))
