import numpy as np
import pytest

from trapwave import stability as sb
from trapwave.errors import BasisTooCoarse, CoefficientsUnavailable

SMALL = sb.HatBasis(R=10.0, N=400)


def test_hat_basis_geometry():
    b = sb.HatBasis(R=12.0, N=100)
    assert b.size == 101
    assert b.delta == pytest.approx(0.12)
    assert b.refine().N == 200
    assert b.evaluate(np.arange(101.0), [0.06]) == pytest.approx([0.5])


def test_linear_operator_levels():
    res = sb.spectrum(None, SMALL, k=4, d=3.0, omega=0.0)
    assert res.lminus_eigs == pytest.approx([3.0, 7.0, 11.0, 15.0], abs=5e-3)
    assert np.array_equal(res.lminus_eigs, res.lplus_eigs)


def test_coarse_basis_rejected():
    with pytest.raises(BasisTooCoarse):
        sb.assemble_Lpm(None, sb.HatBasis(R=10.0, N=20), d=3.0)


def test_ground_state_spectra(gp3_ground):
    mats = sb.assemble_Lpm(gp3_ground, SMALL)
    lm, lp = sb.solve_sym(mats, k=4)
    # phase invariance: L- u = 0
    assert abs(lm[0]) < 1e-3
    assert lm[1] > 3.0
    assert lp[0] < 0 < lp[1]
    assert sb.zero_mode_residual(gp3_ground, mats) < 1e-8


def test_full_spectrum_quartets_and_gauge_pair(gp3_ground):
    mats = sb.assemble_Lpm(gp3_ground, sb.HatBasis(R=10.0, N=200))
    res = sb.solve_full(mats)
    assert res.quartet_defect < 1e-8
    low = np.sort(np.abs(res.lfull_eigs))[:2]
    assert low == pytest.approx([abs(res.gauge)] * 2, rel=0.05)
    assert not res.unstable
    assert res.physical().size == res.lfull_eigs.size - 2


def test_snh_full_spectrum_is_symmetric_route_or_quartet(snh7_state):
    mats = sb.assemble_Lpm(snh7_state, sb.HatBasis(R=12.0, N=300), check=False)
    assert mats.dense_plus
    res = sb.solve_full(mats)
    assert res.quartet_defect < 1e-6
    assert not res.unstable


def test_vk_verdicts(gp3_ground):
    assert sb.vk_verdict(gp3_ground, -1.0, SMALL).verdict == "Stable"
    assert sb.vk_verdict(gp3_ground, +1.0, SMALL).verdict == "Unstable"
    assert sb.vk_verdict(gp3_ground, -1.0, SMALL, turning=True).verdict == "Inconclusive"
    assert sb.vk_verdict(gp3_ground, float("nan"), SMALL).verdict == "Inconclusive"


def test_singular_state_has_no_operator():
    from trapwave import shooting as sh
    st = sh.singular_find_state(7.0)
    with pytest.raises(ValueError):
        sb.assemble_Lpm(st, SMALL)


def test_perturbative_gp_levels():
    levels = sb.perturbative_eigs("gp", 5, 0, k_max=2)
    assert [lv.level for lv in levels] == [0, 0, 1, 2]
    assert levels[2].coeff.real == 0
    assert levels[2].coeff.imag == pytest.approx(-0.13258252147247765, rel=1e-12)
    assert levels[3].at(0.1) == pytest.approx(8j + levels[3].coeff * 0.01)


def test_perturbative_exact_matches_numeric():
    num = sb.perturbative_eigs("snh", 7, 0, k_max=2)
    ex = sb.perturbative_eigs("snh", 7, 0, k_max=2, exact=True)
    for a, b in zip(num, ex):
        assert complex(b.exact) == pytest.approx(a.coeff, rel=1e-12, abs=1e-15)


def test_perturbative_rejects_other_kinds():
    with pytest.raises(ValueError):
        sb.perturbative_eigs("power", 3, 0)


@pytest.mark.parametrize("d, off_axis", [(3, False), (5, True)])
def test_excited_gp_degenerate_pair(d, off_axis):
    deg = [lv for lv in sb.perturbative_eigs("gp", d, 1, k_max=1) if lv.level == 1]
    assert len(deg) == 2 and all(lv.degenerate for lv in deg)
    re = sorted(lv.coeff.real for lv in deg)
    # complex roots of the 2x2 secular equation come as a conjugate-mirrored pair
    assert re[0] == pytest.approx(-re[1], abs=1e-15)
    assert (re[1] > 1e-6) == off_axis


def test_track_lplus_shape(gp3_ground):
    from trapwave import shooting as sh
    other = sh.find_state(sh.ProblemSpec("gp", 3.0, b=0.6))
    out = sb.track_lplus([gp3_ground, other], SMALL, k=3)
    assert out.shape == (2, 3)
    assert out[0, 0] < 0 and out[1, 0] < out[0, 0]
