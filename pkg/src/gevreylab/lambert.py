"""Principal branch of the Lambert W function on [0, inf).

W(x) is the inverse of w * exp(w).  For x >= e the sharp two-sided bracket

    ln x - ln(ln x) <= W(x) <= ln x - 0.5 * ln(ln x)

(with equality exactly at x = e) supplies a certified starting interval; the
iteration below starts from the lower bound and refines it with Halley steps
(cubic convergence).  For 0 <= x < e the bracket does not apply and the
iteration starts from x itself, which is a contraction regime for Halley.

All functions here are pure and safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

DEFAULT_REL_TOL = 1e-12
_MAX_ITER = 64


@dataclass(frozen=True)
class WEval:
    """A single evaluation of W: argument, value, and relative residual.

    residual is |w * exp(w) - x| / max(x, 1).
    """

    x: float
    w: float
    residual: float


def _halley_step(w: float, x: float) -> float:
    ew = math.exp(w)
    f = w * ew - x
    wp1 = w + 1.0
    denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
    return w - f / denom


def lambert_w(x: float, rel_tol: float = DEFAULT_REL_TOL) -> WEval:
    """Evaluate W(x) for x >= 0 so that |w*e^w - x| <= rel_tol * max(x, 1).

    rel_tol must lie in (0, 1e-6]; the default is 1e-12.  Raises DomainError
    for negative or non-finite arguments.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"lambert_w requires a finite argument, got {x!r}")
    if x < 0.0:
        raise DomainError(f"lambert_w is restricted to x >= 0, got {x}")
    if not (0.0 < rel_tol <= 1e-6):
        raise DomainError(f"rel_tol must be in (0, 1e-6], got {rel_tol}")
    if x == 0.0:
        return WEval(x=0.0, w=0.0, residual=0.0)

    if x >= math.e:
        lx = math.log(x)
        w = lx - math.log(lx)
    else:
        w = x / (1.0 + x)  # small-x behaviour W(x) ~ x/(1+x)

    scale = max(x, 1.0)
    for _ in range(_MAX_ITER):
        resid = abs(w * math.exp(w) - x)
        if resid <= rel_tol * scale:
            return WEval(x=x, w=max(w, 0.0), residual=resid / scale)
        w = _halley_step(w, x)
    resid = abs(w * math.exp(w) - x)
    if resid <= rel_tol * scale:
        return WEval(x=x, w=max(w, 0.0), residual=resid / scale)
    raise ArithmeticError(f"lambert_w failed to converge at x={x}")


def lambert_bounds(x: float) -> tuple[float, float]:
    """Two-sided bracket (ln x - ln ln x, ln x - 0.5 ln ln x) for W(x), x >= e.

    Both bounds coincide with W(x) exactly at x = e.  Raises DomainError for
    x < e where the bracket is invalid.
    """
    x = float(x)
    if not math.isfinite(x) or x < math.e:
        raise DomainError(f"lambert_bounds requires x >= e, got {x!r}")
    lx = math.log(x)
    llx = math.log(lx)
    return (lx - llx, lx - 0.5 * llx)
