"""Multi-index decompositions and the generalized higher-order chain rule.

A decomposition of a multi-index alpha is a triple (s, p, m): distinct
nonzero parts p_1 < ... < p_s (lexicographic order) with positive
multiplicities m_1..m_s and sum m_i p_i = alpha componentwise.  Zero
multiplicities are canonicalized away: a part either occurs (m_i >= 1) or is
absent, which keeps the enumeration duplicate-free by construction.

The chain-rule evaluation is

    d^alpha (f o g) = alpha! sum_{(s,p,m)} f^(m)(g) prod_k (1/m_k!) *
                      ((1/p_k!) d^{p_k} g)^{m_k},   m = m_1 + ... + m_s.

Everything here is pure and reentrant; enumeration results are immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import ContractError

DEFAULT_ORDER_CAP = 12


@dataclass(frozen=True)
class Decomposition:
    """One decomposition alpha = sum m_i p_i with strictly increasing parts."""

    parts: tuple[tuple[int, ...], ...]
    mults: tuple[int, ...]

    @property
    def s(self) -> int:
        return len(self.parts)

    @property
    def total_multiplicity(self) -> int:
        return sum(self.mults)

    def reconstruct(self) -> tuple[int, ...]:
        d = len(self.parts[0])
        out = [0] * d
        for part, mult in zip(self.parts, self.mults):
            for i in range(d):
                out[i] += mult * part[i]
        return tuple(out)


def _nonzero_subindices(alpha: tuple[int, ...]) -> list[tuple[int, ...]]:
    parts = [()]
    for bound in alpha:
        parts = [p + (v,) for p in parts for v in range(bound + 1)]
    parts.remove(tuple(0 for _ in alpha))
    return sorted(parts)


def enumerate_decompositions(
    alpha: Sequence[int], order_cap: int = DEFAULT_ORDER_CAP
) -> list[Decomposition]:
    """All decompositions of alpha, exhaustively and without duplicates.

    Parts are scanned in lexicographic order with componentwise residual
    pruning.  |alpha| above order_cap (default 12) raises ContractError; the
    search is exhaustive and must stay tractable.
    """
    alpha = tuple(int(v) for v in alpha)
    if len(alpha) < 1 or any(v < 0 for v in alpha):
        raise ContractError(f"alpha must be a nonnegative multi-index, got {alpha}")
    weight = sum(alpha)
    if weight < 1:
        raise ContractError("alpha must have |alpha| >= 1")
    if weight > order_cap:
        raise ContractError(f"|alpha| = {weight} exceeds enumeration cap {order_cap}")

    candidates = _nonzero_subindices(alpha)
    out: list[Decomposition] = []
    parts_acc: list[tuple[int, ...]] = []
    mults_acc: list[int] = []

    def remaining_max(part: tuple[int, ...], residual: tuple[int, ...]) -> int:
        best = None
        for c, r in zip(part, residual):
            if c > 0:
                q = r // c
                best = q if best is None else min(best, q)
        return best or 0

    def dfs(idx: int, residual: tuple[int, ...]) -> None:
        if all(v == 0 for v in residual):
            out.append(Decomposition(tuple(parts_acc), tuple(mults_acc)))
            return
        if idx >= len(candidates):
            return
        part = candidates[idx]
        top = remaining_max(part, residual)
        dfs(idx + 1, residual)
        for mult in range(1, top + 1):
            new_res = tuple(r - mult * c for r, c in zip(residual, part))
            parts_acc.append(part)
            mults_acc.append(mult)
            dfs(idx + 1, new_res)
            parts_acc.pop()
            mults_acc.pop()

    dfs(0, alpha)
    return out


def decomposition_count_bound(alpha: Sequence[int]) -> int:
    """The combinatorial ceiling (1 + |alpha|)^(d + 2) on the decomposition count."""
    alpha = tuple(int(v) for v in alpha)
    return (1 + sum(alpha)) ** (len(alpha) + 2)


def _multi_factorial(idx: tuple[int, ...]) -> int:
    out = 1
    for v in idx:
        out *= math.factorial(v)
    return out


def faa_di_bruno(
    f_derivs: Mapping[int, float],
    g_derivs: Mapping[tuple[int, ...], float],
    alpha: Sequence[int],
    order_cap: int = DEFAULT_ORDER_CAP,
) -> float:
    """Evaluate d^alpha (f o g) at a point from derivative tables.

    f_derivs maps order m to f^(m) evaluated at g(x) for m = 0..|alpha|;
    g_derivs maps each multi-index p <= alpha (componentwise, |p| >= 1) to
    d^p g(x).  Missing entries raise ContractError naming the gap.
    """
    alpha = tuple(int(v) for v in alpha)
    decomps = enumerate_decompositions(alpha, order_cap=order_cap)
    total = 0.0
    for dec in decomps:
        m = dec.total_multiplicity
        if m not in f_derivs:
            raise ContractError(f"f_derivs is missing order {m}")
        term = float(f_derivs[m])
        for part, mult in zip(dec.parts, dec.mults):
            if part not in g_derivs:
                raise ContractError(f"g_derivs is missing multi-index {part}")
            factor = float(g_derivs[part]) / _multi_factorial(part)
            term *= factor**mult / math.factorial(mult)
        total += term
    return float(_multi_factorial(alpha)) * total
