"""Compactly supported test functions built by iterated mollifier convolution.

The construction convolves scaled copies f_w(x) = (1/w) f(x/w) of one fixed
even mollifier f (normalized exp(-1/(1-x^2))), with stage widths following a
banded schedule: band m uses widths (2(p+1))^(-(1/m) p^(sigma-1)), and the
band thresholds N_m are the smallest indices making the width tail sum drop
below 2^-m.  The total width sum stays below 1, so the support never leaves
[-a, a], while the slowly shrinking widths force derivative growth of type
C^(n^sigma) n^(tau n^sigma) rather than any single-exponent (Gevrey) rate.

Stages below grid resolution (width < 4 dx) act as identity to grid accuracy
and are truncated; the truncation index is reported so certificates name the
finite construction actually built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ContractError
from .grids import GridSignal, GridSpec, symmetric_grid

_TAIL_EPS = 1e-18
_MAX_STAGES = 64
_NOISE_FLOOR = 1e-13
_LEAK_TOL = 1e-3


def _mollifier_shape(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


def base_mollifier(spec: GridSpec) -> GridSignal:
    """Nonnegative even mollifier supported in [-1, 1] with unit integral.

    The grid must cover [-1, 1] with at least 256 samples inside it.  On a
    symmetric grid the evenness is exact; the integral is normalized to 1.
    """
    if spec.lo > -1.0 or spec.hi < 1.0:
        raise ContractError(f"grid [{spec.lo}, {spec.hi}] does not cover [-1, 1]")
    xs = spec.x()
    inside = np.abs(xs) <= 1.0
    if inside.sum() < 256:
        raise ContractError(f"only {int(inside.sum())} samples inside [-1, 1]; need 256")
    samples = _mollifier_shape(xs)
    if abs(spec.lo + spec.hi) <= 1e-12 * spec.dx and spec.n % 2 == 1:
        samples = 0.5 * (samples + samples[::-1])  # evenness exact, not just to ulp
    samples /= np.trapezoid(samples, dx=spec.dx)
    return GridSignal(samples, spec.dx, spec.lo)


def gevrey_cutoff(order: float, halfwidth: float, spec: GridSpec) -> GridSignal:
    """Single-exponent comparison bump exp(-(1 - (x/w)^2)^(-1/(order-1))).

    order = 2 reproduces the base mollifier shape.  Normalized to unit
    integral; used as the control whose derivative growth follows the
    single-exponent law n^(order * n) rather than the two-parameter one.
    """
    if not order > 1:
        raise ContractError(f"order must exceed 1, got {order}")
    xs = spec.x()
    u = xs / halfwidth
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(-((1.0 - u[inside] ** 2) ** (-1.0 / (order - 1.0))))
    if abs(spec.lo + spec.hi) <= 1e-12 * spec.dx and spec.n % 2 == 1:
        out = 0.5 * (out + out[::-1])
    mass = out.sum() * spec.dx
    if mass <= 0:
        raise ContractError("cutoff is below resolution")
    return GridSignal(out / mass, spec.dx, spec.lo)


def _width_tail(start: int, m: int, sigma: float) -> float:
    total = 0.0
    p = start
    while True:
        term = (2.0 * (p + 1)) ** (-float(p) ** (sigma - 1.0) / m)
        total += term
        if term < _TAIL_EPS:
            return total
        p += 1
        if p > start + 100_000:
            raise ContractError("width tail sum failed to converge")


def band_thresholds(sigma: float, m_max: int) -> list[int]:
    """Smallest N_m with sum_{p >= N_m} (2(p+1))^(-(1/m) p^(sigma-1)) < 2^-m."""
    if m_max < 2:
        raise ContractError(f"m_max must be >= 2, got {m_max}")
    thresholds = []
    prev = 0
    for m in range(1, m_max + 1):
        target = 2.0**-m
        n = max(1, prev)
        while _width_tail(n, m, sigma) >= target:
            n += 1
            if n > 10_000:
                raise ContractError(f"threshold search did not converge at band {m}")
        n = max(n, prev + 1) if thresholds else n
        thresholds.append(n)
        prev = n
    return thresholds


def stage_widths(sigma: float, m_max: int, count: int) -> list[float]:
    """First `count` stage widths of the banded schedule (unit scale)."""
    thresholds = band_thresholds(sigma, m_max)
    widths = []
    p = thresholds[0]
    while len(widths) < count:
        m = max(mm + 1 for mm, n in enumerate(thresholds) if n <= p)
        widths.append((2.0 * (p + 1)) ** (-float(p) ** (sigma - 1.0) / m))
        p += 1
    return widths


@dataclass
class BumpResult:
    """A built bump plus the certificate data of its finite construction."""

    signal: GridSignal
    tau: float
    sigma: float
    a: float
    thresholds: list[int]
    widths: list[float]  # widths actually convolved, target scale
    first_skipped_stage: Optional[int]  # schedule index of first sub-resolution stage
    cauchy_sups: list[float] = field(default_factory=list)
    mollifier_l1_derivative: float = 0.0


def _sampled_stage(width: float, dx: float) -> np.ndarray:
    m = int(round(width / dx))
    xs = dx * np.arange(-m, m + 1)
    samples = _mollifier_shape(xs / width) / width
    mass = samples.sum() * dx
    if mass <= 0:
        raise ContractError(f"stage of width {width} is below resolution")
    return samples / mass


def _center_pad(arr: np.ndarray, n: int) -> np.ndarray:
    if len(arr) > n:
        raise ContractError("signal support exceeds the requested grid")
    pad = (n - len(arr)) // 2
    return np.pad(arr, (pad, n - len(arr) - pad))


def build_bump(
    tau: float, sigma: float, a: float, spec: GridSpec, m_max: int
) -> BumpResult:
    """Convolve the banded mollifier stages into a bump supported in [-a, a].

    The grid must be symmetric with odd length, fine enough for the first
    stage (width >= 8 dx), and wide enough to hold [-a, a] plus margin.
    Output: nonnegative, unit integral (to 1e-8), support within [-a, a]
    plus one grid cell.  tau is the membership target recorded with the
    certificate; the stage schedule itself depends only on sigma and m_max.
    """
    if not (tau > 0 and sigma > 1 and a > 0):
        raise ContractError(f"need tau > 0, sigma > 1, a > 0; got {tau}, {sigma}, {a}")
    if abs(spec.lo + spec.hi) > 1e-9 * max(1.0, abs(spec.hi)) or spec.n % 2 == 0:
        raise ContractError("bump grids must be symmetric with odd length")
    dx = spec.dx
    if spec.hi < a + 8 * dx:
        raise ContractError(f"grid [{spec.lo}, {spec.hi}] too narrow for support {a}")

    thresholds = band_thresholds(sigma, m_max)
    schedule = stage_widths(sigma, m_max, _MAX_STAGES)
    widths = []
    first_skipped = None
    for i, u in enumerate(schedule):
        w = a * u
        if w < 4 * dx:
            first_skipped = i
            break
        widths.append(w)
    if not widths or widths[0] < 8 * dx:
        raise ContractError(
            f"grid spacing {dx} too coarse for first stage width {a * schedule[0]}"
        )

    chain = _sampled_stage(widths[0], dx)
    cauchy = []
    for w in widths[1:]:
        nxt = np.convolve(chain, _sampled_stage(w, dx)) * dx
        n = len(nxt)
        cauchy.append(float(np.max(np.abs(nxt - _center_pad(chain, n)))))
        chain = nxt

    samples = _center_pad(chain, spec.n)
    samples = np.maximum(samples, 0.0)
    mol = _mollifier_shape(np.linspace(-1, 1, 4097))
    mol /= np.trapezoid(mol, dx=2.0 / 4096)
    l1d = float(np.abs(np.diff(mol)).sum())

    return BumpResult(
        signal=GridSignal(samples, dx, spec.lo),
        tau=tau,
        sigma=sigma,
        a=a,
        thresholds=thresholds,
        widths=widths,
        first_skipped_stage=first_skipped,
        cauchy_sups=cauchy,
        mollifier_l1_derivative=l1d,
    )


def tensor_bump_2d(result: BumpResult) -> GridSignal:
    """2D bump as the tensor product of a 1D bump with itself."""
    phi = result.signal.samples
    lo = float(result.signal.origin)
    return GridSignal(np.outer(phi, phi), result.signal.dx, (lo, lo))


# ---------------------------------------------------------------------------
# Derivatives: spectral (primary) and finite differences (oracle)
# ---------------------------------------------------------------------------


def spectral_derivative(
    sig: GridSignal,
    n: int,
    pad_factor: int = 4,
    noise_floor: float = _NOISE_FLOOR,
) -> GridSignal:
    """n-th derivative via the DFT multiplier (2 pi i xi)^n.

    Spectrum entries below noise_floor * peak are zeroed before applying the
    multiplier; they are round-off and would otherwise be amplified by
    (2 pi xi)^n at high frequencies.
    """
    if sig.dims != 1:
        raise ContractError("spectral_derivative handles 1D signals")
    if n < 0:
        raise ContractError(f"order must be nonnegative, got {n}")
    npad = pad_factor * len(sig.samples)
    F = np.fft.fft(sig.samples, npad)
    peak = np.max(np.abs(F))
    if peak > 0:
        F = np.where(np.abs(F) >= noise_floor * peak, F, 0.0)
    xi = np.fft.fftfreq(npad, sig.dx)
    D = np.fft.ifft(F * (2j * np.pi * xi) ** n)[: len(sig.samples)]
    return GridSignal(np.real(D), sig.dx, sig.origin)


def _central_diff(samples: np.ndarray, s: int, dx: float) -> np.ndarray:
    out = np.zeros_like(samples)
    out[s:-s] = (samples[2 * s :] - samples[: -2 * s]) / (2.0 * s * dx)
    return out


def fd_derivative(sig: GridSignal, n: int, richardson: bool = True) -> GridSignal:
    """n-th derivative by iterated central differences.

    With richardson=True the step-dx and step-2dx results are combined as
    (4 A - B) / 3, cancelling the leading O(dx^2) error.  Valid for signals
    vanishing near the grid boundary (zero extension is then exact).
    """
    if sig.dims != 1:
        raise ContractError("fd_derivative handles 1D signals")

    def run(step: int) -> np.ndarray:
        vals = sig.samples.astype(float)
        for _ in range(n):
            vals = _central_diff(vals, step, sig.dx)
        return vals

    if n == 0:
        return GridSignal(sig.samples.astype(float), sig.dx, sig.origin)
    fine = run(1)
    if not richardson:
        return GridSignal(fine, sig.dx, sig.origin)
    coarse = run(2)
    return GridSignal((4.0 * fine - coarse) / 3.0, sig.dx, sig.origin)


@dataclass
class GrowthProfile:
    """Sup norms of derivatives with the fitted two-parameter growth law.

    The regression model is ln sup|phi^(n)| ~ n^sigma ln C + tau n^sigma ln n
    over orders n >= 2 (orders 0-1 are constant-dominated).  truncated_at is
    the first order rejected by the spectral-leakage guard, if any.
    """

    orders: list[int]
    log_sup: list[float]
    sigma: float
    fitted_tau: float
    fitted_logC: float
    residual: float
    truncated_at: Optional[int] = None


def fit_power_model(
    orders, log_sup, exponent: float
) -> tuple[float, float, float]:
    """Least squares of log_sup against (n^e, n^e ln n); returns (logC, tau, rms)."""
    ns = np.asarray(orders, dtype=float)
    y = np.asarray(log_sup, dtype=float)
    A = np.stack([ns**exponent, ns**exponent * np.log(ns)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    return float(coef[0]), float(coef[1]), rms


def derivative_growth_profile(
    phi: GridSignal, sigma: float, n_max: int, pad_factor: int = 4
) -> GrowthProfile:
    """Profile sup|phi^(n)| for n = 0..n_max and fit the growth law.

    Derivatives are spectral; each order is checked for support leakage
    (mass appearing outside the support of phi plus margin), and the profile
    is truncated at the first offending order.
    """
    if n_max < 2:
        raise ContractError(f"n_max must be >= 2, got {n_max}")
    lo, hi = phi.support_interval(rel_tol=1e-12)
    margin = max(32 * phi.dx, 0.05 * (hi - lo))
    xs = phi.x()
    inside = (xs >= lo - margin) & (xs <= hi + margin)
    if inside.all():
        raise ContractError("signal is not compactly supported on its grid")

    npad = pad_factor * len(phi.samples)
    F = np.fft.fft(phi.samples, npad)
    peak = np.max(np.abs(F))
    F = np.where(np.abs(F) >= _NOISE_FLOOR * peak, F, 0.0)
    xi = np.fft.fftfreq(npad, phi.dx)

    orders, log_sup = [], []
    truncated_at = None
    for n in range(0, n_max + 1):
        D = np.real(np.fft.ifft(F * (2j * np.pi * xi) ** n)[: len(phi.samples)])
        sup_in = float(np.max(np.abs(D[inside])))
        sup_out = float(np.max(np.abs(D[~inside])))
        if sup_in == 0.0 or sup_out > _LEAK_TOL * sup_in:
            truncated_at = n
            break
        orders.append(n)
        log_sup.append(math.log(sup_in))

    fit_orders = [n for n in orders if n >= 2]
    if len(fit_orders) < 3:
        raise ContractError("too few usable orders for a growth fit")
    fit_logs = [log_sup[orders.index(n)] for n in fit_orders]
    logC, tau_hat, rms = fit_power_model(fit_orders, fit_logs, sigma)
    return GrowthProfile(
        orders=orders,
        log_sup=log_sup,
        sigma=sigma,
        fitted_tau=tau_hat,
        fitted_logC=logC,
        residual=rms,
        truncated_at=truncated_at,
    )


# ---------------------------------------------------------------------------
# Algebra and inverse closedness, verified numerically at low order
# ---------------------------------------------------------------------------


@dataclass
class ClosureReport:
    """Numeric closure check: growth profiles before and after an operation."""

    profile_in: GrowthProfile
    profile_out: GrowthProfile
    passed: bool
    note: str = ""


def verify_algebra(
    phi: GridSignal, psi: GridSignal, sigma: float, n_max: int
) -> ClosureReport:
    """Check that the pointwise product keeps the fitted growth class.

    Passes when the product's fitted tau stays within twice the larger input
    tau (plus slack), the numeric echo of the binomial bound behind closure
    under multiplication.
    """
    if phi.dims != 1 or psi.dims != 1:
        raise ContractError("verify_algebra handles 1D signals")
    if len(phi.samples) != len(psi.samples) or abs(phi.dx - psi.dx) > 1e-15:
        raise ContractError("signals must share a common grid")
    prof_phi = derivative_growth_profile(phi, sigma, n_max)
    prof_psi = derivative_growth_profile(psi, sigma, n_max)
    prod = GridSignal(phi.samples * psi.samples, phi.dx, phi.origin)
    prof_prod = derivative_growth_profile(prod, sigma, n_max)
    tau_in = max(prof_phi.fitted_tau, prof_psi.fitted_tau)
    passed = prof_prod.fitted_tau <= 2.0 * tau_in + 0.25
    return ClosureReport(
        profile_in=prof_phi,
        profile_out=prof_prod,
        passed=passed,
        note=f"tau_product={prof_prod.fitted_tau:.4f} vs inputs<={tau_in:.4f}",
    )


def _plateau_cutoff(
    xs: np.ndarray, dx: float, lo: float, hi: float
) -> tuple[np.ndarray, np.ndarray]:
    """Smooth cutoff supported in [lo, hi], identically 1 on a central plateau."""
    w = 0.15 * (hi - lo)
    ind = ((xs >= lo + w) & (xs <= hi - w)).astype(float)
    mw = max(int(round(w / dx)), 4)
    mx = dx * np.arange(-mw, mw + 1)
    mol = _mollifier_shape(mx / (mw * dx))
    mol /= mol.sum() * dx
    chi = np.convolve(ind, mol, mode="same") * dx
    plateau = (xs >= lo + 2.2 * w) & (xs <= hi - 2.2 * w)
    return np.clip(chi, 0.0, 1.0), plateau


def verify_inverse(
    phi: GridSignal,
    region: tuple[float, float],
    sigma: float,
    n_max: int,
    min_level: Optional[float] = None,
) -> ClosureReport:
    """Check that 1/phi keeps the fitted growth class on a region where phi >= c.

    The reciprocal is smoothly extended by a plateau cutoff supported in the
    region; derivative sups are recorded over the plateau only, where they
    coincide with the derivatives of 1/phi.
    """
    lo, hi = region
    s_lo, s_hi = phi.support_interval()
    if lo <= s_lo or hi >= s_hi:
        raise ContractError("region must lie strictly inside the support")
    xs = phi.x()
    mask = (xs >= lo) & (xs <= hi)
    c = float(np.min(np.abs(phi.samples[mask])))
    peak = float(np.max(np.abs(phi.samples)))
    if min_level is not None:
        c = min(c, min_level)
    if c <= 1e-15 * peak:
        raise ContractError(f"lower level {c} is at the machine-precision floor")

    chi, plateau = _plateau_cutoff(xs, phi.dx, lo, hi)
    recip = np.zeros_like(chi)
    nz = chi > 0
    recip[nz] = chi[nz] / phi.samples[nz]
    ext = GridSignal(recip, phi.dx, phi.origin)

    prof_phi = derivative_growth_profile(phi, sigma, n_max)
    npad = 4 * len(ext.samples)
    F = np.fft.fft(ext.samples, npad)
    pk = np.max(np.abs(F))
    F = np.where(np.abs(F) >= _NOISE_FLOOR * pk, F, 0.0)
    xi = np.fft.fftfreq(npad, ext.dx)
    # Global spectral differentiation rings at the masked-noise level; the
    # region where ext vanishes identically calibrates that artifact floor,
    # and plateau sups within a decade of it are numerically zero.
    margin = max(8 * phi.dx, 0.02 * (hi - lo))
    artifact_zone = (xs < lo - margin) | (xs > hi + margin)
    orders, log_sup, genuine = [], [], []
    for n in range(0, n_max + 1):
        D = np.real(np.fft.ifft(F * (2j * np.pi * xi) ** n)[: len(ext.samples)])
        sup = float(np.max(np.abs(D[plateau])))
        floor = float(np.max(np.abs(D[artifact_zone])))
        orders.append(n)
        log_sup.append(math.log(max(sup, 1e-300)))
        if n >= 1 and sup > 10.0 * floor:
            genuine.append(n)
    negligible = len([n for n in genuine if n >= 2]) < 3
    if negligible:
        prof_inv = GrowthProfile(
            orders=orders,
            log_sup=log_sup,
            sigma=sigma,
            fitted_tau=0.0,
            fitted_logC=0.0,
            residual=0.0,
        )
        passed = True
    else:
        fit_orders = [n for n in genuine if n >= 2]
        fit_logs = [log_sup[orders.index(n)] for n in fit_orders]
        logC, tau_hat, rms = fit_power_model(fit_orders, fit_logs, sigma)
        prof_inv = GrowthProfile(
            orders=orders,
            log_sup=log_sup,
            sigma=sigma,
            fitted_tau=tau_hat,
            fitted_logC=logC,
            residual=rms,
        )
        passed = tau_hat <= 2.0 * max(prof_phi.fitted_tau, 0.1) + 0.5
    return ClosureReport(
        profile_in=prof_phi,
        profile_out=prof_inv,
        passed=passed,
        note="reciprocal negligible beyond order 0" if negligible else "",
    )


def default_bump_grid(a: float, dx: float) -> GridSpec:
    """Symmetric odd grid with ~15% margin around [-a, a]."""
    return symmetric_grid(a * 1.15 + 16 * dx, dx)
