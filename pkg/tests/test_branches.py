import math

import numpy as np
import pytest

from trapwave import branches as br


def test_critical_exponents():
    assert br.mass_critical(3.0) == 2.0
    assert br.energy_critical(3.0) == 4.0


def test_linearization_cubic_d5_oscillates():
    rep = br.linearization_spectrum(3.0, 5.0)
    assert rep.oscillatory
    assert rep.beta == pytest.approx(-0.5)
    lo, hi = rep.oscillation_boundary
    assert lo < 5.0 < hi


def test_linearization_nonlocal_exponent():
    rep = br.linearization_spectrum(2.0, 7.0)
    assert rep.lam == pytest.approx(3.0)


def test_exp_law_fit_synthetic():
    ds = np.arange(7, 15, dtype=float)
    om = ds - 10.0 * np.exp(-0.27 * ds)
    A, gam = br.exp_law_fit(ds, om)
    assert A == pytest.approx(10.0, rel=1e-8)
    assert gam == pytest.approx(0.27, rel=1e-8)


def test_small_b_slope_unknown_case():
    with pytest.raises(ValueError):
        br.small_b_slope("power", 4.0, 7.0)


def test_small_b_prediction_matches_closed_form():
    d = 5.0
    b = 1e-3
    pred = br.small_b_prediction("gp", d, 0, b)
    assert (d - pred) / b ** 2 == pytest.approx(br.small_b_slope("gp", d), rel=1e-8)


def test_short_sweep_and_mass_curve():
    grid = np.geomspace(0.01, 0.1, 4)
    branch = br.sweep_b("gp", 5.0, 0, grid)
    assert not branch.failures
    assert np.all(np.diff(branch.omega) < 0)
    mc = br.mass_curve(branch)
    # small-amplitude branch: mass grows as omega falls from the linear level
    assert np.all(np.asarray(mc.slope)[np.isfinite(mc.slope)] < 0)


def test_crossings_counts_level():
    branch = br.Branch("gp", 5.0, 0)
    for b, om in zip(np.linspace(1, 10, 10), 5 + np.sin(np.linspace(0, 3 * math.pi, 10))):
        branch.points.append(br.BranchPoint(b, om, 1.0, om, 0))
    assert br.crossings(branch, 5.0) >= 2


def test_process_pool_matches_serial():
    grid = [0.02, 0.05]
    serial = br.sweep_b("gp", 5.0, 0, grid)
    pooled = br.sweep_b("gp", 5.0, 0, grid, jobs=2)
    assert pooled.omega == pytest.approx(serial.omega, abs=1e-10)
