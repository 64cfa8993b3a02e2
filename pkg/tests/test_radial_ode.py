import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import jn_zeros

from trapwave import radial_ode as ro


def _eval(coeffs, r):
    return sum(c * r ** k for k, c in enumerate(coeffs))


@given(st.lists(st.floats(-2, 2), min_size=4, max_size=4),
       st.lists(st.floats(-2, 2), min_size=4, max_size=4))
def test_smul_matches_polynomial_product(a, b):
    a, b = np.array(a), np.array(b)
    full = np.polynomial.polynomial.polymul(a, b)[:4]
    assert np.allclose(ro.smul(a, b), full)


def test_sshift():
    a = np.array([1.0, 2.0, 3.0])
    assert ro.sshift(a, 1).tolist() == [0.0, 1.0, 2.0]
    assert ro.sshift(a, 5).tolist() == [0.0, 0.0, 0.0]


@settings(max_examples=30)
@given(st.floats(0.5, 3.0), st.floats(1.5, 5.0), st.sampled_from([-1.0, 1.0]))
def test_spow_signed_against_direct_power(a0, p, sign):
    a = np.array([sign * a0, 0.3, -0.2, 0.1, 0.05, 0.0, 0.0, 0.0])
    ser = ro.spow_signed(a.copy(), p)
    r = 1e-2
    u = _eval(a, r)
    assert _eval(ser, r) == pytest.approx(np.sign(u) * abs(u) ** p, rel=1e-10)


def test_bessel_limit_integration():
    d = 4.0
    sysm = ro.bessel_system(d)
    r0 = 1e-3
    traj, log = ro.integrate(sysm, ro.series_start(sysm, [1.0], r0), r0,
                             ro.IntegrationConfig(r_max=10.0, track=(0,)))
    assert traj.terminal == "ReachedRmax"
    err = np.max(np.abs(traj.value(0) - ro.bessel_limit(d, 1.0, traj.grid)))
    assert err < 1e-10
    # zeros of r^-1 J_1(r)
    assert log.zeros(0) == pytest.approx(jn_zeros(1, 2), abs=1e-10)
    # derivative zeros of r^-1 J_1(r) are the zeros of J_2
    assert log.pattern(0) == ["Z", "D", "Z", "D"]
    assert [e.r for e in log.events if e.kind == "dzero"] == pytest.approx(jn_zeros(2, 2), abs=1e-10)


def test_bessel_limit_at_origin():
    assert ro.bessel_limit(5.0, 2.0, [0.0])[0] == 2.0


@pytest.mark.parametrize("omega, sign", [(2.9, 1), (3.1, -1)])
def test_oscillator_tail_sign_brackets_ground_level(omega, sign):
    # d=3 ground level sits at omega=3: below it u blows up positive, above it crosses zero
    sysm = ro.oscillator_system(3.0, omega)
    r0 = 1e-3
    traj, log = ro.integrate(sysm, ro.series_start(sysm, [1.0], r0), r0,
                             ro.IntegrationConfig(r_max=8.0, track=(0,)))
    assert np.sign(traj.value(0)[-1]) == sign


def test_fit_power_law_recovers_exponent():
    r = np.linspace(0.5, 0.999, 200)
    y = 2.0 * (1.0 - r) ** -0.5
    r_star, alpha, amp = ro.fit_power_law(r, y, 1.0 - 1e-4, 1.2)
    assert r_star == pytest.approx(1.0, abs=1e-3)
    assert alpha == pytest.approx(-0.5, abs=1e-2)
