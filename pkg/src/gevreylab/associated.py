"""Associated functions of the defining sequences, plus weight-axiom checks.

Three closely related gauges are computed from integer suprema in log domain:

  * mu(h)        = inf_{p>=1} h^-p M_p                (product form)
  * T(h)         = max(0, sup_{p>=1} (p ln h - ln M_p))
  * T(h, k)      = max(0, sup_{p>=1} (p^sigma ln h + p ln k - ln M_p))

mu and T share one scan, so the duality mu = exp(-T) is exact (bitwise) in
the regime mu <= 1, and T(1, k) reproduces T(k) exactly.  The scan walks p
upward and stops once the summand has decreased for a fixed number of
consecutive steps, so the reported extremizer is interior whenever the scan
terminates normally; evaluations that exhaust an explicit cap are flagged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ContractError, DomainError
from .lambert import lambert_w
from .sequences import DefiningSequence

_HARD_CAP = 100_000
_PATIENCE = 10


@dataclass(frozen=True)
class AssocResult:
    """Value of one gauge query with its extremizing index and scan status.

    flag is "ok" for a certified interior extremizer, "truncated" when the
    extremizer landed on the cap, and "divergent" when the scan cannot
    certify the supremum: the summand was still increasing at the cap, or
    the cap left too little post-extremizer decline to observe.
    """

    value: float
    arg_p: int
    flag: str


class AssociatedEval:
    """Evaluator bundle for the gauges of one defining sequence.

    Accepts a DefiningSequence or any callable p -> ln M_p.  p_cap limits the
    scan; None means adaptive (stop after 10 consecutive decreases, hard cap
    100000).  last_arg records the extremizer of the most recent query; it is
    diagnostic only and unreliable under concurrent use -- values themselves
    are pure.
    """

    def __init__(
        self,
        seq: Union[DefiningSequence, Callable[[int], float]],
        p_cap: Optional[int] = None,
    ):
        if isinstance(seq, DefiningSequence):
            self.seq: Optional[DefiningSequence] = seq
            self.log_term = seq.log_term
        else:
            self.seq = None
            self.log_term = seq
        if p_cap is not None and p_cap < 2:
            raise ContractError(f"p_cap must be >= 2, got {p_cap}")
        self.p_cap = p_cap
        self.last_arg = 0

    def _scan(self, summand: Callable[[int], float]) -> tuple[float, int, str]:
        limit = self.p_cap if self.p_cap is not None else _HARD_CAP
        best = -math.inf
        arg = 0
        prev = None
        run = 0
        p = 1
        rising_at_end = False
        while p <= limit:
            s = summand(p)
            if s > best:
                best, arg = s, p
            if prev is not None:
                run = run + 1 if s < prev else 0
            if self.p_cap is None and run >= _PATIENCE:
                break
            rising_at_end = prev is not None and s > prev
            prev = s
            p += 1
        if p > limit:
            if arg == limit:
                flag = "truncated"
            elif rising_at_end or limit - arg < _PATIENCE:
                flag = "divergent"  # scan cannot certify the supremum
            else:
                flag = "ok"
        else:
            flag = "ok"
        self.last_arg = arg
        return best, arg, flag


def two_param_T(ev: AssociatedEval, h: float, k: float) -> AssocResult:
    """T(h, k) = max(0, sup_p (p^sigma ln h + p ln k - ln M_p)).

    T(1, k) coincides with komatsu_T(k) exactly.  For h > 1 the supremum can
    escape an explicit cap; this is reported through the "divergent" flag.
    """
    if not (h > 0 and k > 0):
        raise DomainError(f"h and k must be positive, got h={h}, k={k}")
    sigma = ev.seq.sigma if ev.seq is not None else None
    if sigma is None:
        raise ContractError("two_param_T needs a DefiningSequence evaluator")
    log_h = math.log(h)
    log_k = math.log(k)

    def summand(p: int) -> float:
        return float(p) ** sigma * log_h + p * log_k - ev.log_term(p)

    sup, arg, flag = ev._scan(summand)
    value = max(0.0, sup)
    return AssocResult(value=value, arg_p=arg if value > 0 else 0, flag=flag)


def komatsu_T(ev: AssociatedEval, h: float) -> AssocResult:
    """T(h) = max(0, sup_p (p ln h - ln M_p)); the sup form of the gauge."""
    if not h > 0:
        raise DomainError(f"h must be positive, got {h}")
    if ev.seq is not None:
        return two_param_T(ev, 1.0, h)
    log_h = math.log(h)

    def summand(p: int) -> float:
        return p * log_h - ev.log_term(p)

    sup, arg, flag = ev._scan(summand)
    value = max(0.0, sup)
    return AssocResult(value=value, arg_p=arg if value > 0 else 0, flag=flag)


def carleman_mu(ev: AssociatedEval, h: float) -> AssocResult:
    """mu(h) = inf_p h^-p M_p, evaluated in log domain then exponentiated.

    Shares its scan with komatsu_T, so mu(h) = exp(-T(h)) holds bitwise
    whenever mu(h) <= 1.
    """
    if not h > 0:
        raise DomainError(f"h must be positive, got {h}")
    log_h = math.log(h)

    if ev.seq is not None:
        sigma = ev.seq.sigma

        # Mirrors the two_param_T summand at h = 1 term for term, so that
        # exp(-T) reproduces mu bitwise in the mu <= 1 regime.
        def summand(p: int) -> float:
            return float(p) ** sigma * 0.0 + p * log_h - ev.log_term(p)

    else:

        def summand(p: int) -> float:
            return p * log_h - ev.log_term(p)

    sup, arg, flag = ev._scan(summand)
    return AssocResult(value=math.exp(-sup), arg_p=arg, flag=flag)


def gevrey_T_closed(s: float, h: float) -> float:
    """Closed-form gauge (s/e) h^(1/s) of the sequence p^(sp), s > 1."""
    if not s > 1:
        raise DomainError(f"s must exceed 1, got {s}")
    if not h > 0:
        raise DomainError(f"h must be positive, got {h}")
    return (s / math.e) * h ** (1.0 / s)


def asymptotic_T(tau: float, sigma: float, h: float) -> float:
    """Lambert-form asymptotic gauge tau^(-1/(sigma-1)) ln^(s/(s-1)) h / W(ln h)^(1/(s-1)).

    Requires h > e so that ln h > 1 sits in the bracketed regime of W.
    """
    if not (tau > 0 and sigma > 1):
        raise DomainError(f"need tau > 0 and sigma > 1, got {tau}, {sigma}")
    if not h > math.e:
        raise DomainError(f"asymptotic form requires h > e, got {h}")
    lh = math.log(h)
    w = lambert_w(lh).w
    expo = 1.0 / (sigma - 1.0)
    return tau ** (-expo) * lh ** (sigma * expo) / w**expo


def two_param_T_batch(
    tau: float,
    sigma: float,
    log_h: float,
    log_k: np.ndarray,
    p_grid: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Vectorized T(h, k) over an array of ln k values.

    The integer supremum is taken over a dense-then-geometric p grid (exact
    for extremizers below 512, geometrically sampled beyond); adequate for
    regression work where the gauge is evaluated thousands of times.
    """
    if p_grid is None:
        dense = np.arange(1, 513, dtype=float)
        sparse = np.unique(np.round(np.geomspace(512, 250_000, 160)))
        p_grid = np.concatenate([dense, sparse])
    p = np.asarray(p_grid, dtype=float)
    base = p**sigma * log_h - tau * p**sigma * np.log(p)  # (P,)
    vals = base[:, None] + p[:, None] * np.asarray(log_k, dtype=float)[None, :]
    return np.maximum(0.0, vals.max(axis=0))


# ---------------------------------------------------------------------------
# Weight-function axioms
# ---------------------------------------------------------------------------


@dataclass
class WeightReport:
    """Per-axiom outcomes for a candidate weight function."""

    doubling: dict
    linear_growth: dict
    log_negligible: dict
    log_convexity: dict

    @property
    def passed(self) -> bool:
        return all(
            d["passed"]
            for d in (
                self.doubling,
                self.linear_growth,
                self.log_negligible,
                self.log_convexity,
            )
        )


def weight_property_check(
    f: Callable[[float], float], t_grid: Sequence[float]
) -> WeightReport:
    """Check the four weight-function axioms on a grid spanning >= 4 decades.

    doubling:        sup f(2t)/f(t) bounded (top-half sup not exceeding the
                     bottom-half sup by more than 50% plus slack)
    linear_growth:   f(t)/t bounded on the upper half (no growth into the
                     last quarter of the grid)
    log_negligible:  ln t / f(t) decreasing toward 0 on the upper half
                     (relative slack 1e-6)
    log_convexity:   divided-difference slopes of t -> f(e^t) nondecreasing
                     up to -1e-9 * scale
    """
    t = np.asarray([float(v) for v in t_grid], dtype=float)
    if t.ndim != 1 or len(t) < 16:
        raise ContractError("t_grid must contain at least 16 points")
    if np.any(np.diff(t) <= 0) or t[0] <= 0:
        raise ContractError("t_grid must be increasing and positive")
    if t[-1] / t[0] < 1e4:
        raise ContractError("t_grid must span at least 4 decades")

    fv = np.asarray([float(f(v)) for v in t])
    if np.any(fv < 0) or not np.all(np.isfinite(fv)):
        raise ContractError("f must be finite and nonnegative on the grid")

    n = len(t)
    half = n // 2

    f2 = np.asarray([float(f(2.0 * v)) for v in t])
    pos = fv > 0
    ratios = np.full(n, np.nan)
    ratios[pos] = f2[pos] / fv[pos]
    lo_r = np.nanmax(ratios[:half])
    hi_r = np.nanmax(ratios[half:])
    alpha = {"passed": bool(hi_r <= 1.5 * lo_r + 1.0), "sup_low": float(lo_r),
             "sup_high": float(hi_r)}

    over_t = fv[half:] / t[half:]
    q3 = len(over_t) // 2
    early = np.max(over_t[:q3])
    late = np.max(over_t[q3:])
    beta = {"passed": bool(late <= 1.1 * early + 1e-12), "sup_early": float(early),
            "sup_late": float(late)}

    upper = slice(half, n)
    with np.errstate(divide="ignore"):
        s = np.log(t[upper]) / fv[upper]
    dec = np.all(s[1:] <= s[:-1] * (1.0 + 1e-6))
    gamma = {"passed": bool(dec and s[-1] < s[0]), "first": float(s[0]),
             "last": float(s[-1])}

    u = np.log(t)
    slopes = np.diff(fv) / np.diff(u)
    scale = np.max(np.abs(fv))
    convex = np.all(np.diff(slopes) >= -1e-9 * max(scale, 1.0))
    delta = {"passed": bool(convex), "min_slope_step": float(np.min(np.diff(slopes)))}

    return WeightReport(
        doubling=alpha,
        linear_growth=beta,
        log_negligible=gamma,
        log_convexity=delta,
    )
