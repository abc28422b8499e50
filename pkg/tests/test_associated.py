import math

import numpy as np
import pytest

import gevreylab as gl
from gevreylab.errors import ContractError, DomainError


def brute_force_T(tau, sigma, h, k=None, p_cap=50):
    """Independent oracle: direct scan of the summand up to p_cap."""
    best = -math.inf
    arg = 0
    for p in range(1, p_cap + 1):
        lt = tau * p**sigma * math.log(p) if p > 1 else 0.0
        s = p * math.log(h) - lt
        if k is not None:
            s = p**sigma * math.log(h) + p * math.log(k) - lt
        if s > best:
            best, arg = s, p
    return max(0.0, best), arg


@pytest.fixture(scope="module")
def ev12():
    return gl.AssociatedEval(gl.DefiningSequence(1.0, 2.0))


def test_carleman_examples(ev12):
    r = gl.carleman_mu(ev12, 10.0)
    assert abs(r.value - 0.1) <= 1e-15 and r.arg_p == 1
    r = gl.carleman_mu(ev12, 1.0)
    assert r.value == 1.0 and r.arg_p == 1
    r = gl.carleman_mu(ev12, 100.0)
    assert abs(r.value - 16.0 / 10000.0) <= 1e-17 and r.arg_p == 2


def test_komatsu_examples(ev12):
    T, arg = brute_force_T(1.0, 2.0, 10.0)
    r = gl.komatsu_T(ev12, 10.0)
    assert abs(r.value - T) <= 1e-14 and r.arg_p == arg == 1
    assert abs(r.value - math.log(10.0)) <= 1e-14
    assert gl.komatsu_T(ev12, 0.5).value == 0.0
    assert gl.komatsu_T(ev12, 1.0).value == 0.0
    r = gl.komatsu_T(ev12, 100.0)
    # p = 2 beats p = 1: 2 ln 100 - ln 16 > ln 100
    assert abs(r.value - (2 * math.log(100) - math.log(16))) <= 1e-13
    assert r.arg_p == 2


def test_two_param_examples(ev12):
    # h = 1 recovers the one-parameter gauge bitwise
    for k in np.geomspace(0.5, 1e10, 50):
        assert gl.two_param_T(ev12, 1.0, float(k)).value == gl.komatsu_T(ev12, float(k)).value
    r = gl.two_param_T(ev12, 0.5, 10.0)
    T, arg = brute_force_T(1.0, 2.0, None or 0.5, k=10.0)
    assert abs(r.value - T) <= 1e-14 and r.arg_p == arg == 1
    assert abs(r.value - (math.log(0.5) + math.log(10.0))) <= 1e-14


def test_divergence_flags():
    seq = gl.DefiningSequence(1.0, 2.0)
    small = gl.AssociatedEval(seq, p_cap=2)
    assert gl.two_param_T(small, 2.0, 1.0).flag == "divergent"
    cap5 = gl.AssociatedEval(seq, p_cap=5)
    assert gl.komatsu_T(cap5, 1e30).flag == "truncated"
    wide = gl.AssociatedEval(seq, p_cap=60)
    assert gl.komatsu_T(wide, 10.0).flag == "ok"
    with pytest.raises(ContractError):
        gl.AssociatedEval(seq, p_cap=1)


def test_last_arg_diagnostic(ev12):
    gl.komatsu_T(ev12, 100.0)
    assert ev12.last_arg == 2


def test_duality_valid_regime(ev12):
    for h in np.geomspace(1.0, 1e12, 200):
        mu = gl.carleman_mu(ev12, float(h)).value
        T = gl.komatsu_T(ev12, float(h)).value
        assert mu <= 1.0 + 1e-15
        assert abs(mu - math.exp(-T)) <= 1e-12 * mu


def test_gevrey_closed_form():
    assert abs(gl.gevrey_T_closed(2.0, math.e**2) - 2.0) <= 1e-14
    assert abs(gl.gevrey_T_closed(2.0, 1.0) - 2.0 / math.e) <= 1e-15
    assert abs(gl.gevrey_T_closed(3.0, math.e**3) - 3.0) <= 1e-14
    with pytest.raises(DomainError):
        gl.gevrey_T_closed(1.0, 2.0)
    with pytest.raises(DomainError):
        gl.gevrey_T_closed(2.0, 0.0)


def test_gevrey_envelope():
    # the integer sup sits below the continuous extremum, within one summand step
    for s in (2.0, 3.0):
        ev = gl.AssociatedEval(
            lambda p, s=s: s * p * math.log(p) if p > 1 else 0.0
        )
        for h in np.geomspace(math.e, 1e8, 160):
            Td = gl.komatsu_T(ev, float(h)).value
            Tc = gl.gevrey_T_closed(s, float(h))
            assert Td <= Tc + 1e-9
            assert Tc - Td <= s * math.log(h) + 2.0


def test_asymptotic_values():
    assert abs(gl.asymptotic_T(1.0, 2.0, math.e**math.e) - math.e**2) <= 1e-11
    assert abs(gl.asymptotic_T(4.0, 2.0, math.e**math.e) - math.e**2 / 4.0) <= 1e-11
    h = 1e6
    expect = math.log(h) ** 2 / gl.lambert_w(math.log(h)).w
    assert abs(gl.asymptotic_T(1.0, 2.0, h) - expect) <= 1e-9
    with pytest.raises(DomainError):
        gl.asymptotic_T(1.0, 2.0, 2.0)


def test_lambert_form_ratio_stabilizes(ev12):
    def spread(lo, hi):
        hs = np.geomspace(lo, hi, 80)
        r = [
            gl.komatsu_T(ev12, float(h)).value / gl.asymptotic_T(1.0, 2.0, float(h))
            for h in hs
        ]
        assert min(r) > 0 and math.isfinite(max(r))
        return max(r) / min(r)

    assert spread(1e6, 1e12) <= spread(1e3, 1e6)


def test_sandwich_between_one_parameter_gauges():
    # T(tau2, k) + A <= T(tau, h, k) <= T(tau1, k) + B with explicit A, B:
    # A = inf_p p^sigma (ln h + (tau2 - tau) ln p) and
    # B = sup_p p^sigma (ln h - (tau - tau1) ln p), computed independently.
    sigma = 2.0
    tau, tau1, tau2 = 1.0, 0.5, 2.0
    ev_mid = gl.AssociatedEval(gl.DefiningSequence(tau, sigma))
    ev_lo = gl.AssociatedEval(gl.DefiningSequence(tau1, sigma))
    ev_hi = gl.AssociatedEval(gl.DefiningSequence(tau2, sigma))
    ks = np.geomspace(10.0, 1e10, 60)
    for h in (0.25, 0.5, 2.0, 4.0):
        lower_const = min(
            min(p**sigma * (math.log(h) + (tau2 - tau) * math.log(p))
                for p in range(1, 2000)),
            0.0,
        )
        upper_const = max(
            max(p**sigma * (math.log(h) - (tau - tau1) * math.log(p))
                for p in range(1, 2000)),
            0.0,
        )
        for k in ks:
            mid = gl.two_param_T(ev_mid, h, float(k)).value
            hi = gl.komatsu_T(ev_hi, float(k)).value
            lo = gl.komatsu_T(ev_lo, float(k)).value
            assert mid - hi >= lower_const - 1e-9
            assert mid - lo <= upper_const + 1e-9


def test_monotonicity():
    ev = gl.AssociatedEval(gl.DefiningSequence(1.0, 2.0))
    hs = np.geomspace(0.5, 1e10, 120)
    vals = [gl.komatsu_T(ev, float(h)).value for h in hs]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    # two-parameter gauge decreases as tau grows
    for tau1, tau2 in ((0.5, 1.0), (1.0, 2.0)):
        e1 = gl.AssociatedEval(gl.DefiningSequence(tau1, 2.0))
        e2 = gl.AssociatedEval(gl.DefiningSequence(tau2, 2.0))
        for h, k in ((0.5, 100.0), (2.0, 1e4), (1.0, 1e6)):
            assert (
                gl.two_param_T(e2, h, k).value
                <= gl.two_param_T(e1, h, k).value + 1e-12
            )


def test_domain_errors(ev12):
    with pytest.raises(DomainError):
        gl.komatsu_T(ev12, 0.0)
    with pytest.raises(DomainError):
        gl.carleman_mu(ev12, -1.0)
    with pytest.raises(DomainError):
        gl.two_param_T(ev12, 0.0, 1.0)


def test_weight_axioms_log_square():
    grid = np.geomspace(math.e**2, 1e12, 200)
    rep = gl.weight_property_check(lambda t: max(0.0, math.log(t)) ** 2, grid)
    assert rep.passed


def test_weight_axioms_quadratic_fails_linear_growth():
    grid = np.geomspace(math.e**2, 1e12, 200)
    rep = gl.weight_property_check(lambda t: t * t, grid)
    assert not rep.linear_growth["passed"]
    assert rep.log_convexity["passed"]
    assert not rep.passed


def test_weight_axioms_lambert_gauge():
    grid = np.geomspace(math.e**2, 1e12, 200)
    rep = gl.weight_property_check(lambda t: gl.asymptotic_T(1.0, 2.0, t), grid)
    assert rep.passed


def test_weight_axioms_grid_contract():
    with pytest.raises(ContractError):
        gl.weight_property_check(lambda t: t, np.geomspace(10.0, 100.0, 50))
    with pytest.raises(ContractError):
        gl.weight_property_check(lambda t: t, np.geomspace(1.0, 1e6, 8))
