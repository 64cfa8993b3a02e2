import numpy as np
import pytest

from trapwave import branches as br
from trapwave import shooting as sh
from trapwave.errors import BracketInvalid


@pytest.mark.parametrize("kwargs", [
    dict(kind="nope", d=3.0, b=1.0),
    dict(kind="snh", d=2.5, b=1.0),
    dict(kind="gp", d=3.0, b=-1.0),
    dict(kind="singular", d=5.0),
    dict(kind="power", d=3.0, b=1.0, p=0.5),
    dict(kind="power", d=3.0, b=1.0, p=3.0, potential="r7"),
])
def test_problem_spec_rejects(kwargs):
    with pytest.raises(ValueError):
        sh.ProblemSpec(**kwargs)


def test_singular_exponent_d7():
    assert sh.singular_exponent(7.0) == pytest.approx(3.0)


@pytest.mark.parametrize("kind, d, b", [("gp", 5.0, 0.05), ("snh", 7.0, 0.05)])
def test_small_amplitude_frequency(kind, d, b):
    st = sh.find_state(sh.ProblemSpec(kind, d, b=b))
    ratio = (d - st.omega) / b ** 2
    assert ratio == pytest.approx(br.small_b_slope(kind, d), rel=1e-3)


def test_gp_ground_state(gp3_ground):
    st = gp3_ground
    assert st.zeros == ()
    assert 0 < 3.0 - st.omega < 0.2
    assert sh.pohozaev_residual(st) < 1e-8
    assert st.mass > 0


def test_excited_state_node_count():
    st = sh.find_state(sh.ProblemSpec("gp", 3.0, b=0.5), n=2)
    assert len(st.zeros) == 2
    # near the linear level 3 + 4n for moderate amplitude
    assert abs(st.omega - 11.0) < 0.5


def test_snh_state_fields(snh7_state):
    st = snh7_state
    assert st.omega == pytest.approx(6.98256036883, abs=1e-9)
    r = np.array([st.R_glue + 1.0, st.R_glue + 3.0])
    u, up, v = st.fields(r)
    assert np.all(v > 0)
    # Newton tail v ~ M / ((d-2) r^(d-2))
    assert v[1] / v[0] == pytest.approx((r[0] / r[1]) ** 5, rel=1e-6)
    assert sh.pohozaev_residual(st) < 1e-8


def test_bisection_bracket_shrinks():
    spec = sh.ProblemSpec("gp", 3.0, b=0.5)
    lo, hi = sh.auto_bracket(spec, 0)
    lo2, hi2, trace = sh.bisect(spec, 0, (lo, hi), 1e-10)
    assert hi2 - lo2 <= 1e-10
    assert lo <= lo2 <= hi2 <= hi
    assert len(trace) > 10


def test_invalid_bracket():
    spec = sh.ProblemSpec("snh", 7.0, b=1.0)
    with pytest.raises(BracketInvalid):
        sh.find_state(spec, bracket=(7.5, 8.0))


def test_singular_solution_d7():
    st = sh.singular_find_state(7.0)
    assert st.singular
    assert np.isfinite(st.omega)
    assert st.omega > 0


def test_frequency_bounds_nonlocal():
    st = sh.find_state(sh.ProblemSpec("snh", 7.0, b=10.0))
    fb = sh.frequency_bounds(st)
    assert fb["in_window"]
    # the moment form holds; the printed intermediate constant d - 4/(d-2) does not
    assert fb["improved_with_moment"] <= st.omega
    assert st.omega < fb["improved_intermediate"]
    assert fb["improved_final"] == pytest.approx(7.0 / 5.0)


def test_frequency_bounds_gp_has_window_only(gp3_ground):
    fb = sh.frequency_bounds(gp3_ground)
    assert fb["in_window"] and "improved_final" not in fb
