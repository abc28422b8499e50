"""Discrete Fourier front-end and decay analysis of transforms.

The transform convention is f_hat(xi) = integral f(x) exp(-2 pi i x xi) dx,
approximated by dx-weighted FFT with a phase factor for the grid origin.
Compactly supported smooth signals have transforms decaying like
exp(-h * g(xi)) with the Lambert-form regressor

    g(xi) = ln^(sigma/(sigma-1)) |xi| / W(ln |xi|)^(1/(sigma-1)),

and pw_decay_fit regresses ln |f_hat| on -g over the usable frequency
window (above |xi| = e^2, above the round-off floor).  Jump discontinuities
only decay polynomially and fail that fit; this is the numerical content of
the two directions of the Paley-Wiener-type characterization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError
from .grids import GridSignal
from .lambert import lambert_w

NOISE_FLOOR_REL = 1e-13
_XI_LOW = math.e**2


@dataclass(frozen=True)
class Spectrum:
    """Sampled transform values on an increasing frequency grid."""

    values: np.ndarray
    xi: np.ndarray
    dxi: float

    def energy(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.dxi)


def dft(signal: GridSignal, pad_factor: int = 1) -> Spectrum:
    """Transform of a sampled signal, approximating the continuous integral.

    Zero-padding by pad_factor densifies the frequency grid (the decay fits
    want >= 100 usable frequencies).  Parseval holds to round-off: the
    spectrum energy equals the signal energy.
    """
    if signal.dims != 1:
        raise ContractError("dft handles 1D signals")
    if pad_factor < 1:
        raise ContractError(f"pad_factor must be >= 1, got {pad_factor}")
    n = len(signal.samples)
    npad = pad_factor * n
    F = np.fft.fft(signal.samples, npad) * signal.dx
    xi = np.fft.fftfreq(npad, signal.dx)
    F = F * np.exp(-2j * np.pi * float(signal.origin) * xi)
    order = np.fft.fftshift(np.arange(npad))
    xi_s = xi[order]
    return Spectrum(values=F[order], xi=xi_s, dxi=float(xi_s[1] - xi_s[0]))


def idft(spec: Spectrum, n: int, dx: float, origin: float) -> GridSignal:
    """Invert dft() back onto the original grid (n samples, spacing dx)."""
    npad = len(spec.values)
    order = np.fft.fftshift(np.arange(npad))
    F = np.empty(npad, dtype=complex)
    F[order] = spec.values
    xi = np.fft.fftfreq(npad, dx)
    F = F * np.exp(2j * np.pi * origin * xi) / dx
    samples = np.fft.ifft(F)[:n]
    return GridSignal(samples, dx, origin)


def point_mass_spectrum(
    positions: Sequence[float], weights: Sequence[float], xi: np.ndarray
) -> Spectrum:
    """Transform of a finite combination of point masses, entered directly.

    This is the desk-scale stand-in for compactly supported distributional
    inputs: the transform sum_j w_j exp(-2 pi i x_j xi) is bounded, hence
    trivially of admissible growth.
    """
    xi = np.asarray(xi, dtype=float)
    vals = np.zeros_like(xi, dtype=complex)
    for x0, w in zip(positions, weights):
        vals += w * np.exp(-2j * np.pi * x0 * xi)
    return Spectrum(values=vals, xi=xi, dxi=float(xi[1] - xi[0]))


def lambert_regressor(abs_xi: np.ndarray, sigma: float) -> np.ndarray:
    """g(xi) = ln^(s/(s-1))|xi| / W(ln|xi|)^(1/(s-1)) for |xi| > e."""
    lx = np.log(abs_xi)
    w = np.asarray([lambert_w(v).w for v in lx])
    e = 1.0 / (sigma - 1.0)
    return lx ** (sigma * e) / w**e


@dataclass(frozen=True)
class DecayFit:
    """Fitted exp(-h g(xi)) decay certificate over a frequency window."""

    fitted_h: float
    fitted_logC: float
    r2: float
    xi_range: tuple[float, float]
    n_used: int


def _usable_window(
    spec: Spectrum, xi_low: float, floor_rel: float
) -> tuple[np.ndarray, np.ndarray]:
    mag = np.abs(spec.values)
    peak = mag.max()
    if peak == 0.0:
        raise ContractError("spectrum is identically zero")
    mask = (np.abs(spec.xi) >= xi_low) & (mag >= floor_rel * peak)
    return np.abs(spec.xi[mask]), mag[mask]


def _linfit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    A = np.stack([np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(coef[0]), float(coef[1]), r2


def pw_decay_fit(
    spec: Spectrum,
    tau: float,
    sigma: float,
    xi_low: float = _XI_LOW,
    floor_rel: float = NOISE_FLOOR_REL,
    min_points: int = 100,
    min_decades: float = 2.0,
) -> DecayFit:
    """Regress ln|f_hat| on the Lambert-form regressor over the usable window.

    fitted_h > 0 with good r2 certifies membership-consistent decay; slow
    (polynomial) decay shows up as a poor or non-positive fit.  Raises
    ContractError when the window spans fewer than min_decades decades or
    holds fewer than min_points samples.
    """
    if not (sigma > 1):
        raise ContractError(f"sigma must exceed 1, got {sigma}")
    abs_xi, mag = _usable_window(spec, xi_low, floor_rel)
    if len(abs_xi) < min_points:
        raise ContractError(
            f"only {len(abs_xi)} usable frequencies; need {min_points}"
        )
    if abs_xi.max() / abs_xi.min() < 10.0**min_decades:
        raise ContractError("usable frequency range spans fewer than 2 decades")
    g = lambert_regressor(abs_xi, sigma)
    logC, slope, r2 = _linfit(g, np.log(mag))
    return DecayFit(
        fitted_h=-slope,
        fitted_logC=logC,
        r2=r2,
        xi_range=(float(abs_xi.min()), float(abs_xi.max())),
        n_used=len(abs_xi),
    )


def power_decay_fit(
    spec: Spectrum,
    exponent: float,
    xi_low: float = _XI_LOW,
    floor_rel: float = NOISE_FLOOR_REL,
) -> DecayFit:
    """Same regression against |xi|^exponent (e.g. the single-exponent class)."""
    abs_xi, mag = _usable_window(spec, xi_low, floor_rel)
    g = abs_xi**exponent
    logC, slope, r2 = _linfit(g, np.log(mag))
    return DecayFit(
        fitted_h=-slope,
        fitted_logC=logC,
        r2=r2,
        xi_range=(float(abs_xi.min()), float(abs_xi.max())),
        n_used=len(abs_xi),
    )


@dataclass(frozen=True)
class DerivativeBounds:
    """Quadrature upper bounds sup|u^(n)| <= integral (2 pi |xi|)^n |f_hat| d xi."""

    orders: list[int]
    log_bounds: list[float]
    divergent: list[bool]


def derivative_bound_from_decay(
    spec: Spectrum,
    tau: float,
    sigma: float,
    n_max: int,
    floor_rel: float = NOISE_FLOOR_REL,
) -> DerivativeBounds:
    """Certified derivative bounds by direct quadrature of the inversion formula.

    For each order the integrand (2 pi |xi|)^n |f_hat| is summed over the
    usable grid; if the integrand is still a substantial fraction of its peak
    at the window edge the quadrature has not converged and the order is
    flagged divergent (a regularity-test failure, not an exception).
    """
    mag = np.abs(spec.values)
    peak = mag.max()
    orders = list(range(0, n_max + 1))
    if peak == 0.0:
        return DerivativeBounds(orders, [-math.inf] * len(orders), [False] * len(orders))
    mask = mag >= floor_rel * peak
    abs_xi = np.abs(spec.xi[mask])
    vals = mag[mask]
    edge = abs_xi >= 0.98 * abs_xi.max()
    log_bounds, divergent = [], []
    for n in orders:
        integrand = (2.0 * np.pi * abs_xi) ** n * vals
        total = float(integrand.sum() * spec.dxi)
        log_bounds.append(math.log(total) if total > 0 else -math.inf)
        divergent.append(bool(integrand[edge].max() > 0.02 * integrand.max()))
    return DerivativeBounds(orders=orders, log_bounds=log_bounds, divergent=divergent)


@dataclass(frozen=True)
class GrowthCheck:
    """Does ln|u_hat| stay below logC + h g(xi) with stable h on the window?"""

    accepted: bool
    fitted_h: float
    logC: float


def growth_bound_check(
    spec: Spectrum, sigma: float, xi_low: float = _XI_LOW
) -> GrowthCheck:
    """Accept spectra of at-most exp(h g(xi)) growth (bounded ones trivially).

    The required h per frequency is (ln|u_hat| - logC)/g(xi); acceptance
    means the requirement does not keep growing toward the window edge.
    """
    mask = np.abs(spec.xi) >= xi_low
    if mask.sum() < 16:
        raise ContractError("too few frequencies above xi_low")
    abs_xi = np.abs(spec.xi[mask])
    mag = np.abs(spec.values[mask])
    logC = math.log(max(float(mag[0]), 1e-300))
    g = lambert_regressor(abs_xi, sigma)
    with np.errstate(divide="ignore"):
        h_req = (np.log(np.maximum(mag, 1e-300)) - logC) / g
    half = len(h_req) // 2
    sup_low = float(np.max(h_req[:half]))
    sup_high = float(np.max(h_req[half:]))
    fitted = max(0.0, sup_low, sup_high)
    accepted = sup_high <= max(1.2 * sup_low + 0.1, 0.1)
    return GrowthCheck(accepted=accepted, fitted_h=fitted, logC=logC)
