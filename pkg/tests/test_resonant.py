import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trapwave import coeffs as co
from trapwave import resonant as rs
from trapwave.errors import InadmissibleInvariants, PNotInDisk, TableTooSmall


@pytest.fixture(scope="module")
def t4():
    return co.table_recursive(12, 4.0)


def _two_mode(N):
    a = np.zeros(N + 1, complex)
    a[:2] = 1
    return rs.ModeVector(a, 4)


def test_two_mode_invariants(t4):
    c = rs.conserved(_two_mode(10), t4)
    assert c.N_mass == 2 and c.J == 1
    assert c.H == pytest.approx(0.90625, rel=1e-13)
    assert c.S == pytest.approx(0.25, rel=1e-12)
    assert c.Z == pytest.approx(math.sqrt(2))


def test_mode_vector_rejects_nan():
    with pytest.raises(ValueError):
        rs.ModeVector([1.0, np.nan], 4)


def test_table_too_small(t4):
    with pytest.raises(TableTooSmall):
        rs.resonant_rhs(_two_mode(20), t4)


def test_short_run_conserves(t4):
    rng = np.random.default_rng(3)
    a = (rng.normal(size=13) + 1j * rng.normal(size=13)) * np.exp(-np.arange(13) / 2)
    ev = rs.evolve(rs.ModeVector(a, 4), t4, 5.0, n_samples=21)
    dr = ev.drift()
    # Z couples through the truncated top mode, so only N, J and H are exact here
    assert max(dr["N"], dr["J"], dr["H"]) < 1e-8


def test_z_drift_follows_truncation():
    # two-mode data stays far from the top mode at N=30, but not at N=12
    drifts = {N: rs.evolve(_two_mode(N), co.table_recursive(N, 4.0), 10.0, n_samples=21).drift()["absZ"]
              for N in (12, 30)}
    assert drifts[30] < 1e-8 < drifts[12]


def test_z_rate_vanishes_in_four_dimensions(t4):
    rng = np.random.default_rng(7)
    a = (rng.normal(size=13) + 1j * rng.normal(size=13)) * np.exp(-np.arange(13))
    system = rs.ResonantSystem(t4, 12)
    scale = np.sum(np.abs(a)) ** 4
    assert abs(rs.z_rate(rs.ModeVector(a, 4), system)) < 1e-9 * scale


@settings(max_examples=20, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False),
                min_size=6, max_size=6))
def test_resonant_part_of_spectral_system(t4, vals):
    a = np.array(vals, dtype=complex)
    res = rs.ResonantSystem(t4, 5).force(a)
    spec = rs.SpectralSystem(t4, 5).force(0.0, a, resonant_only=True)
    assert np.allclose(res, spec, atol=1e-12)


def test_spectral_force_at_zero_time_is_full_sum(t4):
    a = np.linspace(0.1, 0.6, 6).astype(complex)
    S = t4.S[:6, :6, :6, :6]
    want = np.einsum("njkl,j,k,l->n", S, a.conj(), a, a)
    assert np.allclose(rs.SpectralSystem(t4, 5).force(0.0, a), want)


def test_manifold_seed_refit_round_trip():
    prm = rs.ManifoldParams(0.3 + 0.2j, 0.8 - 0.1j, 0.3 * np.exp(0.7j))
    seed = rs.manifold_seed(prm, 40)
    back, res = rs.refit(seed.alphas)
    assert res < 1e-10
    assert back.p == pytest.approx(prm.p, abs=1e-10)
    assert back.a == pytest.approx(prm.a, abs=1e-10)
    assert back.b == pytest.approx(prm.b, abs=1e-10)


def test_manifold_invariants_match_sums():
    prm = rs.ManifoldParams(0.3 + 0.2j, 0.8 - 0.1j, 0.3 * np.exp(0.7j))
    seed = rs.manifold_seed(prm, 120)
    T = co.table_recursive(40, 4.0)
    Nm, J, S, Z = rs.manifold_invariants(prm)
    a = seed.alphas
    n = np.arange(len(a))
    assert Nm == pytest.approx(np.sum(np.abs(a) ** 2), rel=1e-12)
    assert J == pytest.approx(np.sum(n * np.abs(a) ** 2), rel=1e-12)
    short = rs.ModeVector(a[:41], 4)
    assert rs.conserved(short, T).S == pytest.approx(S, rel=1e-6)


def test_p_outside_disk():
    with pytest.raises(PNotInDisk):
        rs.ManifoldParams(1, 1, 1.2).y
    with pytest.raises(PNotInDisk):
        rs.manifold_seed(rs.ManifoldParams(1, 1, 1.0), 5)


def test_two_mode_oscillator_period():
    osc = rs.oscillator_params(2, 1, 0.25)
    assert osc.period == pytest.approx(32 * math.pi / math.sqrt(7))


def test_inadmissible_invariants():
    with pytest.raises(InadmissibleInvariants):
        rs.oscillator_params(1.0, 0.0, 0.1)


def test_reduced_flow_follows_closed_form():
    prm = rs.ManifoldParams(0.2 + 0.1j, 0.7, 0.2j)
    osc = rs.oscillator_params(*rs.manifold_invariants(prm)[:3])
    run = rs.reduced_evolve(prm, osc.period, n_samples=101)
    y, _ = rs.oscillator_curve(prm, run.t)
    assert np.max(np.abs(run.y - y)) < 1e-8


def test_decompose_small_state_is_nearly_ground_mode():
    from trapwave import shooting as sh
    st_ = sh.find_state(sh.ProblemSpec("gp", 3.0, b=0.05))
    mv, gap = rs.decompose(st_, 6)
    assert abs(gap) < 1e-8 * st_.mass
    assert np.abs(mv.alphas[0]) ** 2 > 0.999 * st_.mass
