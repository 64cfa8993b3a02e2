import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trapwave import coeffs as co
from trapwave.errors import IndexOutOfTable
from trapwave.quad import gl_nodes


@pytest.fixture(scope="module")
def snh7():
    return co.table_recursive(6, 7.0)


@pytest.mark.parametrize("d", [3.0, 4.0, 7.0])
def test_modes_orthonormal(d):
    x, w = gl_nodes(np.linspace(0, co.radial_extent(8, d), 81), 20)
    E = co.modes(8, d, x)
    gram = (E * w * x ** (d - 1)) @ E.T
    assert np.allclose(gram, np.eye(9), atol=1e-12)


def test_mode_at_origin():
    for n in range(5):
        assert co.mode_at_origin(n, 5.0) == pytest.approx(co.eval_mode(n, 5.0, 0.0), rel=1e-13)


@pytest.mark.parametrize("d", [4.0, 5.0, 7.0, 9.0])
def test_recursive_against_quadrature(d):
    rec = co.table_recursive(5, d).S
    quad = co.table_quadrature(5, d)
    assert np.max(np.abs(rec - quad)) < 1e-12 * np.max(np.abs(quad))


def test_gp_recursive_against_quadrature():
    rec = co.table_recursive(5, 5.0, "gp").S
    quad = co.table_quadrature(5, 5.0, "gp")
    assert np.allclose(rec, quad, rtol=1e-12, atol=1e-15)


def test_closed_forms(snh7):
    assert co.table_recursive(2, 4.0)[0, 0, 0, 0] == 0.5
    assert snh7[0, 0, 0, 0] == pytest.approx(co.s0000_closed(7.0), rel=1e-14)
    for k in range(4):
        assert snh7[k, 0, k, 0] == pytest.approx(co.sk0k0_closed(k, 7.0), rel=1e-12)
    gp = co.table_recursive(4, 5.0, "gp")
    for n in range(4):
        assert gp[n, n, 0, 0] == pytest.approx(co.gp_snn00_closed(n, 5.0), rel=1e-12)


def test_printed_variant_differs_by_dimension_factor():
    assert co.sk0k0_closed(2, 7.0) / co.sk0k0_printed(2, 7.0) == pytest.approx(25.0)


@settings(max_examples=40)
@given(st.tuples(*[st.integers(0, 6)] * 4))
def test_pair_symmetries(snh7, idx):
    i, j, k, l = idx
    v = snh7[i, j, k, l]
    # densities e_i e_l and e_j e_k interact through a symmetric kernel
    assert snh7[l, j, k, i] == pytest.approx(v, rel=1e-12, abs=1e-16)
    assert snh7[i, k, j, l] == pytest.approx(v, rel=1e-12, abs=1e-16)
    assert snh7[j, i, l, k] == pytest.approx(v, rel=1e-12, abs=1e-16)


def test_exact_symbolic_route(snh7):
    import sympy as sp
    ex = co.s_exact(0, 0, 0, 0, 7)
    assert sp.simplify(ex - sp.sqrt(2) / (15 * sp.sqrt(sp.pi))) == 0
    assert float(co.s_exact(2, 1, 0, 3, 7)) == pytest.approx(snh7[2, 1, 0, 3], rel=1e-12)
    assert float(co.s_exact(1, 1, 0, 2, 5, "gp")) == pytest.approx(
        co.table_recursive(2, 5.0, "gp")[1, 1, 0, 2], rel=1e-12)


def test_d_prime_identity_only_in_four_dimensions():
    worst4, _ = co.d_prime_stratum(co.table_recursive(7, 4.0), 6)
    worst3, scale3 = co.d_prime_stratum(co.table_recursive(7, 3.0), 6)
    assert worst4 < 1e-11
    assert worst3 > 1e-3 * scale3


def test_symmetrize():
    t = co.symmetrize(co.table_recursive(3, 4.0))
    assert np.allclose(t.S, t.S.transpose(0, 1, 3, 2))
    assert t.provenance.endswith("+sym")


def test_index_out_of_table(snh7):
    with pytest.raises(IndexOutOfTable):
        snh7[7, 0, 0, 0]
    with pytest.raises(IndexOutOfTable):
        snh7[-1, 0, 0, 0]


def test_table_round_trip(tmp_path, snh7):
    path = tmp_path / "s.txt"
    co.write_table(snh7, path, header_extra="note")
    back = co.read_table(path)
    assert back.N_max == 6 and back.d == 7.0 and back.kind == "snh"
    assert np.array_equal(back.S, snh7.S)


def test_read_table_needs_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0 0 0 0 1.0\n")
    with pytest.raises(ValueError):
        co.read_table(path)


def test_stability_index_map():
    assert co.stab_to_res(1, 2, 3, 4) == (1, 3, 4, 2)
