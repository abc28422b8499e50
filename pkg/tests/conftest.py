"""Shared fixtures: canonical bumps, spectra, and the scan corpus.

Session-scoped because the builds and transforms are reused across many
tests; everything here is deterministic.
"""

from __future__ import annotations

import numpy as np
import pytest

import gevreylab as gl
from gevreylab.wavefront import window_from_bump


@pytest.fixture(scope="session")
def growth_bump():
    """Canonical bump for derivative-growth work: a=3, dx=3/8192, m_max=3.

    The scale is chosen so that the two-parameter growth signature at orders
    2..8 is well separated from the single-exponent one (see test_bump).
    """
    dx = 3.0 / 8192
    spec = gl.default_bump_grid(3.0, dx)
    return gl.build_bump(1.0, 2.0, 3.0, spec, m_max=3)


@pytest.fixture(scope="session")
def spectral_bump():
    """Canonical bump for transform decay work: a=0.08, dx=1/8192, m_max=2.

    Narrow support spreads the spectrum across two-plus usable decades
    before the round-off floor.
    """
    spec = gl.symmetric_grid(0.12, 1.0 / 8192)
    return gl.build_bump(1.0, 2.0, 0.08, spec, m_max=2)


@pytest.fixture(scope="session")
def spectral_spectrum(spectral_bump):
    return gl.dft(spectral_bump.signal, pad_factor=8)


@pytest.fixture(scope="session")
def box_signal():
    spec = gl.GridSpec(-1.0, 1.0, 8193)
    xs = spec.x()
    samples = (np.abs(xs) <= 0.25 - spec.dx / 3).astype(float)
    return gl.GridSignal(samples, spec.dx, spec.lo)


@pytest.fixture(scope="session")
def base_mollifier_signal():
    return gl.base_mollifier(gl.GridSpec(-1.5, 1.5, 2 * 8192 + 1))


@pytest.fixture(scope="session")
def scan_corpus():
    """Smooth carrier, jump and cusp variants, window, and aligned scan points."""
    dx = 1.0 / 4096
    built = gl.build_bump(1.0, 2.0, 1.6, gl.symmetric_grid(1.75, dx), m_max=3)
    n_target = len(gl.symmetric_grid(2.0, dx).x())
    pad = (n_target - len(built.signal.samples)) // 2
    samples = np.pad(
        built.signal.samples, (pad, n_target - len(built.signal.samples) - pad)
    )
    u_smooth = gl.GridSignal(samples, dx, -2.0)
    xs = u_smooth.x()

    wres = gl.build_bump(1.0, 2.0, 0.09, gl.symmetric_grid(0.11, dx), m_max=3)
    g = window_from_bump(wres.signal)
    r_idx = (len(g.samples) - 1) // 2
    radius = r_idx * dx

    j_center = round((0.0 - (-2.0)) / dx)
    points = [float(-2.0 + (j_center + m * r_idx) * dx) for m in range(-7, 11)]
    jump_x = points[13]

    u_sign = gl.GridSignal(
        samples * np.where(xs >= jump_x - 1e-12, 1.0, -1.0), dx, -2.0
    )
    u_cube = gl.GridSignal(samples * np.abs(xs) ** 3, dx, -2.0)
    return {
        "u_smooth": u_smooth,
        "u_sign": u_sign,
        "u_cube": u_cube,
        "window": g,
        "radius": radius,
        "points": points,
        "jump_x": jump_x,
        "cusp_x": 0.0,
    }
