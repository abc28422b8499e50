import itertools
import math

import numpy as np
import pytest

import gevreylab as gl
from gevreylab.errors import ContractError
from gevreylab.faa import decomposition_count_bound


def partition_numbers(n_max):
    """Euler pentagonal recurrence; independent of the enumerator."""
    p = [1] + [0] * n_max
    for n in range(1, n_max + 1):
        total, k = 0, 1
        while True:
            g1 = k * (3 * k - 1) // 2
            g2 = k * (3 * k + 1) // 2
            if g1 > n and g2 > n:
                break
            sign = -1 if k % 2 == 0 else 1
            if g1 <= n:
                total += sign * p[n - g1]
            if g2 <= n:
                total += sign * p[n - g2]
            k += 1
        p[n] = total
    return p


def test_d1_small_cases():
    decs = gl.enumerate_decompositions((3,))
    as_sets = {tuple(zip(d.parts, d.mults)) for d in decs}
    assert as_sets == {
        (((1,), 3),),
        (((1,), 1), ((2,), 1)),
        (((3,), 1),),
    }
    assert len(gl.enumerate_decompositions((1,))) == 1
    decs2 = gl.enumerate_decompositions((1, 1))
    as_sets2 = {tuple(zip(d.parts, d.mults)) for d in decs2}
    assert as_sets2 == {
        (((1, 1), 1),),
        (((0, 1), 1), ((1, 0), 1)),
    }


def test_d1_counts_match_partition_function():
    p = partition_numbers(8)
    for n in range(1, 9):
        assert len(gl.enumerate_decompositions((n,))) == p[n]


def test_count_bound_all_alphas_up_to_weight_8():
    for d in (1, 2, 3):
        for alpha in itertools.product(range(0, 9), repeat=d):
            w = sum(alpha)
            if not (1 <= w <= 8):
                continue
            decs = gl.enumerate_decompositions(alpha)
            assert len(decs) <= decomposition_count_bound(alpha), alpha
            seen = set()
            for dec in decs:
                assert dec.reconstruct() == alpha
                key = tuple(zip(dec.parts, dec.mults))
                assert key not in seen
                seen.add(key)
                assert all(b and a < b for a, b in zip(dec.parts, dec.parts[1:])) or \
                    len(dec.parts) == 1 or list(dec.parts) == sorted(dec.parts)
                assert dec.s <= w and dec.total_multiplicity <= w


def test_enumeration_contracts():
    with pytest.raises(ContractError):
        gl.enumerate_decompositions((13,))
    with pytest.raises(ContractError):
        gl.enumerate_decompositions((0, 0))
    with pytest.raises(ContractError):
        gl.enumerate_decompositions((-1, 2))


def test_square_of_cubic():
    # f(y) = y^2, g(x) = x^3 at x = 1: d^2/dx^2 (x^6) = 30 x^4 -> 30
    f = {0: 1.0, 1: 2.0, 2: 2.0}
    g = {(1,): 3.0, (2,): 6.0}
    assert abs(gl.faa_di_bruno(f, g, (2,)) - 30.0) <= 1e-12


def test_identity_outer_function():
    # f = identity: the chain rule degenerates to the derivative of g
    rng = np.random.default_rng(7)
    for alpha in ((3,), (2, 1)):
        w = sum(alpha)
        f = {m: 0.0 for m in range(w + 1)}
        f[1] = 1.0
        g = {}
        for q in itertools.product(*(range(a + 1) for a in alpha)):
            if 1 <= sum(q) <= w:
                g[q] = float(rng.normal())
        val = gl.faa_di_bruno(f, g, alpha)
        assert abs(val - g[alpha]) <= 1e-12 * max(1.0, abs(g[alpha]))


def richardson_dn(func, x, n, h0):
    """Doubly Richardson-extrapolated iterated central differences, O(h^6)."""

    def iterated(h):
        coeffs = [1.0]
        for _ in range(n):
            new = [0.0] * (len(coeffs) + 2)
            for i, c in enumerate(coeffs):
                new[i] += c
                new[i + 2] -= c
            coeffs = new
        m = len(coeffs) // 2
        return sum(
            c * func(x + (m - i) * h) for i, c in enumerate(coeffs)
        ) / (2.0 * h) ** n

    a, b, c = iterated(h0), iterated(h0 / 2.0), iterated(h0 / 4.0)
    r1 = (4.0 * b - a) / 3.0
    r2 = (4.0 * c - b) / 3.0
    return (16.0 * r2 - r1) / 15.0


def test_exponential_composition_matches_finite_differences():
    # f = exp, g a polynomial: order-3 derivative against the FD oracle
    gpoly = np.polynomial.Polynomial([0.3, -1.2, 0.7, 0.25])
    x0 = 0.4
    gx = gpoly(x0)
    f = {m: math.exp(gx) for m in range(4)}
    gd = {(k,): float(gpoly.deriv(k)(x0)) for k in range(1, 4)}
    val = gl.faa_di_bruno(f, gd, (3,))
    oracle = richardson_dn(lambda t: math.exp(gpoly(t)), x0, 3, 0.03)
    assert abs(val - oracle) <= 1e-8 * max(1.0, abs(oracle))


def test_mutation_breaks_composition():
    # removing any single decomposition changes the exp(g) value measurably
    gpoly = np.polynomial.Polynomial([0.3, -1.2, 0.7, 0.25])
    x0 = 0.4
    gx = gpoly(x0)
    f = {m: math.exp(gx) for m in range(4)}
    gd = {(k,): float(gpoly.deriv(k)(x0)) for k in range(1, 4)}
    decs = gl.enumerate_decompositions((3,))
    full = gl.faa_di_bruno(f, gd, (3,))

    def value_without(skip):
        total = 0.0
        for i, dec in enumerate(decs):
            if i == skip:
                continue
            term = f[dec.total_multiplicity]
            for part, mult in zip(dec.parts, dec.mults):
                term *= (gd[part] / math.factorial(part[0])) ** mult / math.factorial(mult)
            total += term
        return math.factorial(3) * total

    for i in range(len(decs)):
        assert abs(value_without(i) - full) > 1e-6 * max(1.0, abs(full))


def test_missing_entries_named():
    with pytest.raises(ContractError, match="order 2"):
        gl.faa_di_bruno({0: 1.0, 1: 1.0}, {(1,): 1.0, (2,): 1.0}, (2,))
    with pytest.raises(ContractError, match=r"\(2,\)"):
        gl.faa_di_bruno({m: 1.0 for m in range(3)}, {(1,): 1.0}, (2,))


def test_composition_consistent_with_spectral_squares(growth_bump):
    # f(y) = y^2 composed with the built bump: combining pointwise derivative
    # tables through the chain rule matches spectral derivatives of phi^2
    phi = growth_bump.signal
    derivs = [gl.spectral_derivative(phi, n).samples for n in range(0, 5)]
    sq = gl.GridSignal(phi.samples**2, phi.dx, phi.origin)
    sq_derivs = [gl.spectral_derivative(sq, n).samples for n in range(1, 5)]
    idxs = np.linspace(0.25, 0.75, 24) * len(phi.samples)
    for alpha in (1, 2, 3, 4):
        scale = np.max(np.abs(sq_derivs[alpha - 1]))
        for j in (int(i) for i in idxs):
            gx = derivs[0][j]
            f = {0: gx**2, 1: 2.0 * gx, 2: 2.0}
            f.update({m: 0.0 for m in range(3, alpha + 1)})
            gd = {(k,): float(derivs[k][j]) for k in range(1, alpha + 1)}
            val = gl.faa_di_bruno(f, gd, (alpha,))
            assert abs(val - sq_derivs[alpha - 1][j]) <= 1e-3 * scale
