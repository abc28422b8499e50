"""Log-domain machinery for the defining sequences p^(tau * p^sigma).

The terms overflow double precision almost immediately (already ~2e4 digits
near p = 100 for tau=1, sigma=2), so every operation below works with
log M_p = tau * p^sigma * ln p and reports fitted constants as suprema over
finite prefixes.  Growth-condition checks return reports rather than raising:
a violated inequality is data, not an error.

Conventions:
  * M_0 = 1 and M_1 = 1, i.e. log_term(0) = log_term(1) = 0.
  * "R-sequences" are positive sequences monotonically increasing to
    infinity.  Only finite prefixes are ever examined; unboundedness is
    certified against a caller-supplied growth witness, never verified as a
    limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .errors import ContractError

_FLOOR_SNAP = 1e-9


def floor_power(p: int, sigma: float) -> int:
    """floor(p**sigma) with an exactness guard.

    If p**sigma is within 1e-9 (relative) of an integer it is snapped to it,
    so that e.g. sigma = 2 always yields exact integer exponents.
    """
    if p == 0:
        return 0
    v = float(p) ** sigma
    r = round(v)
    if abs(v - r) <= _FLOOR_SNAP * max(1.0, abs(v)):
        return int(r)
    return int(math.floor(v))


@dataclass(frozen=True)
class DefiningSequence:
    """Two-parameter sequence M_p = p^(tau * p^sigma) held in log domain."""

    tau: float
    sigma: float

    def __post_init__(self):
        if not (self.tau > 0):
            raise ContractError(f"tau must be positive, got {self.tau}")
        if not (self.sigma > 1):
            raise ContractError(f"sigma must exceed 1, got {self.sigma}")

    def log_term(self, p: int) -> float:
        """ln M_p; zero for p in {0, 1}."""
        if p <= 1:
            return 0.0
        return self.tau * float(p) ** self.sigma * math.log(p)

    def scaled(self, factor: float) -> "DefiningSequence":
        """Same sigma, tau multiplied by factor."""
        return DefiningSequence(self.tau * factor, self.sigma)


@dataclass
class ConditionReport:
    """Outcome of one growth-condition check on a finite prefix."""

    condition: str
    passed: bool
    p_max: int
    violations: list = field(default_factory=list)
    details: dict = field(default_factory=dict)


def check_m1(seq: DefiningSequence, p_max: int) -> ConditionReport:
    """Log-convexity check: 2 ln M_p <= ln M_{p-1} + ln M_{p+1}, 1 <= p <= p_max."""
    if p_max < 2:
        raise ContractError(f"p_max must be >= 2, got {p_max}")
    violations = []
    worst = -math.inf
    for p in range(1, p_max + 1):
        lhs = 2.0 * seq.log_term(p)
        rhs = seq.log_term(p - 1) + seq.log_term(p + 1)
        gap = lhs - rhs
        worst = max(worst, gap)
        if gap > 1e-9 * max(1.0, abs(rhs)):
            violations.append(p)
    return ConditionReport(
        condition="log-convexity",
        passed=not violations,
        p_max=p_max,
        violations=violations,
        details={"worst_gap": worst},
    )


def fit_m2_tilde(seq: DefiningSequence, p_max: int) -> float:
    """Smallest ln C certifying M_{p+q} <= C^(p^s + q^s) * M'_p * M'_q on the prefix.

    M' is the companion sequence with tau doubled geometrically (tau * 2^(sigma-1)).
    Returns the supremum over 0 <= p, q <= p_max (p = q = 0 skipped) of the
    normalized log defect.
    """
    if p_max < 1:
        raise ContractError(f"p_max must be >= 1, got {p_max}")
    heavy = seq.scaled(2.0 ** (seq.sigma - 1.0))
    best = -math.inf
    for p in range(0, p_max + 1):
        for q in range(0, p_max + 1):
            if p == 0 and q == 0:
                continue
            num = seq.log_term(p + q) - heavy.log_term(p) - heavy.log_term(q)
            den = float(p) ** seq.sigma + float(q) ** seq.sigma
            best = max(best, num / den)
    return best


def fit_m2prime_tilde(
    seq: DefiningSequence, p_max: int, denom_power: Optional[float] = None
) -> float:
    """Smallest ln C certifying M_{p+1} <= C^(p^denom_power) * M_p for 1 <= p <= p_max.

    denom_power defaults to sigma (the stable normalization).  Passing
    denom_power=1 recovers the classical one-step condition, whose fitted
    constant grows without bound for these sequences (negative control).
    """
    if p_max < 1:
        raise ContractError(f"p_max must be >= 1, got {p_max}")
    power = seq.sigma if denom_power is None else float(denom_power)
    best = -math.inf
    for p in range(1, p_max + 1):
        num = seq.log_term(p + 1) - seq.log_term(p)
        best = max(best, num / float(p) ** power)
    return best


def fit_doubling_constant(seq: DefiningSequence, p_max: int) -> float:
    """Fitted ln C for M_{2p} <= C^(2 p^sigma) * M_p^2 on the prefix.

    For these sequences the fit diverges (grows like ln p), which is exactly
    why the tau-doubled companion sequence is needed in fit_m2_tilde.
    """
    if p_max < 1:
        raise ContractError(f"p_max must be >= 1, got {p_max}")
    best = -math.inf
    for p in range(1, p_max + 1):
        num = seq.log_term(2 * p) - 2.0 * seq.log_term(p)
        best = max(best, num / (2.0 * float(p) ** seq.sigma))
    return best


def m3prime_partial_sum(seq: DefiningSequence, p_max: int) -> tuple[float, float]:
    """Partial sum of M_{p-1}/M_p up to p_max plus a certified tail bound.

    The tail majorant is sum_{p > p_max} (2p)^(-tau * (p-1)^(sigma-1)), term-wise
    an upper bound for M_{p-1}/M_p, accumulated until terms drop below 1e-18.
    partial + tail is then a certified upper bound for the full series.
    """
    if p_max < 1:
        raise ContractError(f"p_max must be >= 1, got {p_max}")
    partial = 0.0
    for p in range(1, p_max + 1):
        partial += math.exp(seq.log_term(p - 1) - seq.log_term(p))
    tail = 0.0
    p = p_max + 1
    while True:
        term = math.exp(-seq.tau * float(p - 1) ** (seq.sigma - 1.0) * math.log(2 * p))
        tail += term
        if term < 1e-18:
            break
        p += 1
        if p > p_max + 200_000:  # the majorant decays superexponentially
            raise ArithmeticError("tail accumulation failed to converge")
    return partial, tail


# ---------------------------------------------------------------------------
# R-sequences and their sigma-indexed products
# ---------------------------------------------------------------------------


@dataclass
class RSequence:
    """Positive sequence r_1, r_2, ... monotonically increasing to infinity.

    term(j) returns r_j for j >= 1.  growth_witness, when given, maps a bound
    B to an index j with r_j > B; certify_unbounded checks the claim on that
    single index.  The library never verifies the limit itself.
    """

    term: Callable[[int], float]
    growth_witness: Optional[Callable[[float], int]] = None

    def prefix(self, n: int) -> list[float]:
        return [float(self.term(j)) for j in range(1, n + 1)]

    def check_increasing(self, n: int) -> bool:
        vals = self.prefix(n)
        return all(b >= a for a, b in zip(vals, vals[1:])) and all(v > 0 for v in vals)

    def certify_unbounded(self, bound: float) -> int:
        """Return an index j with r_j > bound, validated against the witness."""
        if self.growth_witness is None:
            raise ContractError("no growth witness declared for this sequence")
        j = int(self.growth_witness(bound))
        if j < 1 or not self.term(j) > bound:
            raise ContractError(
                f"growth witness failed: r_{j} = {self.term(j)} is not > {bound}"
            )
        return j


def from_prefix(values: Sequence[float]) -> RSequence:
    """RSequence backed by an explicit finite prefix (index error beyond it)."""
    vals = [float(v) for v in values]

    def term(j: int) -> float:
        return vals[j - 1]

    return RSequence(term=term)


class ProductSequence:
    """Cached log-products log R_{p,sigma} = sum_{j <= floor(p^sigma)} ln r_j.

    The internal cache of cumulative sums is append-only and may be extended
    by a single writer; concurrent reads of a completed prefix are safe.
    """

    def __init__(self, base: RSequence, sigma: float):
        if not (sigma > 1):
            raise ContractError(f"sigma must exceed 1, got {sigma}")
        self.base = base
        self.sigma = float(sigma)
        self._cumlog: list[float] = [0.0]  # _cumlog[m] = sum_{j<=m} ln r_j

    def _extend(self, m: int) -> None:
        while len(self._cumlog) <= m:
            j = len(self._cumlog)
            rj = float(self.base.term(j))
            if rj <= 0:
                raise ContractError(f"r_{j} = {rj} is not positive")
            self._cumlog.append(self._cumlog[-1] + math.log(rj))

    def log_product(self, p: int) -> float:
        if p < 0:
            raise ContractError(f"p must be nonnegative, got {p}")
        m = floor_power(p, self.sigma)
        self._extend(m)
        return self._cumlog[m]


def r_product_log(pr: ProductSequence, p: int) -> float:
    """log R_{p,sigma}; zero at p = 0."""
    return pr.log_product(p)


def tilde_r(r: RSequence | Sequence[float], p_max: int) -> list[float]:
    """Comparison sequence r~ <= r with subadditive products.

    r~_1 = r_1 and r~_{j+1} = min(r_{j+1}, (j+1)/j * r~_j).  The output is
    monotone increasing, dominated by r, and its partial products P_m satisfy
    P_{p+q} <= 2^(p+q) P_p P_q for all p + q <= p_max (verified before
    returning).  Non-monotone input prefixes raise ContractError.
    """
    if p_max < 1:
        raise ContractError(f"p_max must be >= 1, got {p_max}")
    prefix = r.prefix(p_max) if isinstance(r, RSequence) else [float(v) for v in r][:p_max]
    if len(prefix) < p_max:
        raise ContractError(f"need {p_max} input terms, got {len(prefix)}")
    if any(v <= 0 for v in prefix):
        raise ContractError("input sequence must be positive")
    if any(b < a for a, b in zip(prefix, prefix[1:])):
        raise ContractError("input prefix is not monotonically increasing")

    out = [prefix[0]]
    for j in range(1, p_max):
        out.append(min(prefix[j], (j + 1) / j * out[-1]))

    logp = [0.0]
    for v in out:
        logp.append(logp[-1] + math.log(v))
    ln2 = math.log(2.0)
    for p in range(1, p_max):
        for q in range(1, p_max - p + 1):
            lhs = logp[p + q]
            rhs = (p + q) * ln2 + logp[p] + logp[q]
            if lhs > rhs + 1e-9:
                raise ArithmeticError(
                    f"product subadditivity failed at (p, q) = ({p}, {q})"
                )
    return out


def witness_r_sequence(
    log_a: Sequence[float], sigma: float, h_grid: Sequence[float]
) -> list[float]:
    """Construct an increasing r-sequence with R_{p,sigma} * a_p <= 1 on the prefix.

    log_a[p] = ln a_p for p = 0..P-1 (use -inf for a_p = 0).  For each grid
    point h >= 1 the empirical constant ln C_h = sup_p (p^sigma ln h + ln a_p)
    is formed; H_j = sup_h (j ln h - ln C_h) and r_j = H_j / H_{j-1} (all in
    log domain, H_0 = 1).  The returned prefix has length floor((P-1)^sigma),
    enough to evaluate R_{p,sigma} for every p in the input prefix.

    Raises ContractError if some sup is non-finite, naming the offending h.
    """
    if not (sigma > 1):
        raise ContractError(f"sigma must exceed 1, got {sigma}")
    la = [float(v) for v in log_a]
    if len(la) < 2:
        raise ContractError("need at least two prefix terms")
    hs = sorted(set(float(h) for h in h_grid))
    if not hs:
        raise ContractError("h_grid must be nonempty")
    if hs[0] < 1.0:
        raise ContractError(f"h_grid entries must be >= 1, got {hs[0]}")

    n_terms = floor_power(len(la) - 1, sigma)
    if all(v == -math.inf for v in la):
        return [float(j) for j in range(1, n_terms + 1)]

    log_C = []
    for h in hs:
        lnh = math.log(h)
        sup = max(float(p) ** sigma * lnh + la[p] for p in range(len(la)))
        if not math.isfinite(sup):
            raise ContractError(f"sup of h^(p^sigma) a_p is not finite at h = {h}")
        log_C.append(sup)

    log_H = [0.0]
    for j in range(1, n_terms + 1):
        log_H.append(max(j * math.log(h) - lc for h, lc in zip(hs, log_C)))

    r = [math.exp(log_H[j] - log_H[j - 1]) for j in range(1, n_terms + 1)]
    for a, b in zip(r, r[1:]):
        if b < a - 1e-12 * max(1.0, abs(a)):
            raise ArithmeticError("constructed sequence is not monotone")
    # R_{p,sigma} a_p = H_{floor(p^sigma)} a_p <= 1 by construction; verify.
    for p in range(len(la)):
        if log_H[floor_power(p, sigma)] + la[p] > 1e-9:
            raise ArithmeticError(f"product bound violated at p = {p}")
    return r


def check_domination(
    seqA_log: Callable[[int], float],
    seqB_log: Callable[[int], float],
    mode: str,
    p_max: int,
) -> ConditionReport:
    """Empirical check of M_p <= A B^p N_p on a prefix.

    mode="subset": fit the minimal affine majorant ln A + p ln B of the log
    difference d_p = ln M_p - ln N_p (slope = largest chord slope from p = 1,
    clamped at 0), and compare the slope fitted on the half prefix with the
    full-prefix slope: a stable slope certifies the relation empirically.

    mode="strictly_smaller": for each B = 2^-k, k = 0..10, the required ln A
    is sup_p (d_p - p ln B); the check passes if every sup is attained
    strictly inside the prefix (the constant has stopped growing).
    """
    if p_max < 2:
        raise ContractError(f"p_max must be >= 2, got {p_max}")
    d = [seqA_log(p) - seqB_log(p) for p in range(1, p_max + 1)]

    def hull_slope(vals):
        if len(vals) < 2:
            return 0.0
        return max(0.0, max((vals[p] - vals[0]) / p for p in range(1, len(vals))))

    if mode == "subset":
        slope_full = hull_slope(d)
        slope_half = hull_slope(d[: max(2, p_max // 2)])
        log_A = max(dp - (p + 1) * slope_full for p, dp in enumerate(d))
        stable = slope_full <= slope_half * 1.05 + 0.5
        return ConditionReport(
            condition="subset",
            passed=stable,
            p_max=p_max,
            details={"log_A": log_A, "log_B": slope_full, "log_B_half": slope_half},
        )
    if mode == "strictly_smaller":
        required = {}
        stabilized = True
        for k in range(0, 11):
            log_B = -k * math.log(2.0)
            vals = [dp - (p + 1) * log_B for p, dp in enumerate(d)]
            arg = max(range(len(vals)), key=lambda i: vals[i])
            required[f"log_A_at_2^-{k}"] = vals[arg]
            if arg == len(vals) - 1:
                stabilized = False
        return ConditionReport(
            condition="strictly_smaller",
            passed=stabilized,
            p_max=p_max,
            details=required,
        )
    raise ContractError(f"unknown mode {mode!r}")
