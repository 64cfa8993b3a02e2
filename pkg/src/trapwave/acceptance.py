"""End-to-end acceptance checks, shared by the test suite and ``trapwave repro``.

Each check returns a :class:`CheckResult`; nothing here loosens a target to
make it pass.  Checks that fail against the stated targets are documented in
the decisions ledger.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number:2d}: {self.title} -- {self.detail} ({self.seconds:.1f}s)"


def _timed(number: int, title: str):
    def deco(fn: Callable[..., tuple[bool, str]]):
        def run(cache: Optional[dict] = None) -> CheckResult:
            t0 = time.perf_counter()
            ok, detail = fn({} if cache is None else cache)
            return CheckResult(number, title, bool(ok), detail, time.perf_counter() - t0)
        run.number = number
        run.title = title
        return run
    return deco


def _d7_branch(cache: dict):
    if "branch7" not in cache:
        from .branches import sweep_b
        t0 = time.perf_counter()
        cache["branch7"] = sweep_b("snh", 7, 0, np.geomspace(0.1, 1e3, 60))
        cache["branch7_time"] = time.perf_counter() - t0
    return cache["branch7"]


@_timed(1, "SNH ground state d=7 b=1")
def c01(cache):
    from .shooting import ProblemSpec, find_state
    t0 = time.perf_counter()
    st = find_state(ProblemSpec("snh", 7, 1.0), 0, (7.0, 8.0))
    dt = time.perf_counter() - t0
    ok = abs(st.shooting_param - 7.0817) <= 5e-4 and abs(st.omega - 6.9826) <= 1e-3 and dt < 5
    return ok, f"c*={st.shooting_param:.6f} omega={st.omega:.6f} runtime={dt:.2f}s"


TABLE1 = [7.5000, 7.2500, 7.1250, 7.0625, 7.0938, 7.0781, 7.0859, 7.0820, 7.0801, 7.0811, 7.0818, 7.0817]


@_timed(2, "bisection trace vs printed iterates")
def c02(cache):
    from .shooting import ProblemSpec, bisect
    _, _, trace = bisect(ProblemSpec("snh", 7, 1.0), 0, (7.0, 8.0), 1e-6)
    got = [float(f"{c:.5g}") for c in trace[:12]]
    bad = [i + 1 for i, (g, w) in enumerate(zip(got, TABLE1)) if abs(g - w) > 5e-5]
    det = "all 12 agree" if not bad else "mismatch at " + ", ".join(
        f"c{i}={got[i - 1]:.4f} (printed {TABLE1[i - 1]:.4f})" for i in bad)
    return not bad, det


@_timed(3, "blow-up diagnostics d=7 b=1 c=7")
def c03(cache):
    from .radial_ode import detect_blowup_exponent
    from .shooting import ProblemSpec, shoot
    traj, _ = shoot(ProblemSpec("snh", 7, 1.0), 7.0)
    fits = detect_blowup_exponent(traj)
    (r_u, a_u, A_u), (r_h, a_h, A_h) = fits[0], fits[1]
    ok = (abs(r_u - 6.5259) <= 0.01 and abs(a_u + 2) <= 0.05 and abs(a_h + 2) <= 0.05
          and abs(A_u - 6) <= 0.3 and abs(A_h + 6) <= 0.3)
    return ok, f"r*={r_u:.5f} exponents=({a_u:.4f}, {a_h:.4f}) amplitudes=({A_u:.4f}, {A_h:.4f})"


@_timed(4, "GP ground state d=5 b=1")
def c04(cache):
    from .shooting import ProblemSpec, find_state, pohozaev_residual
    st = find_state(ProblemSpec("gp", 5, 1.0), 0)
    poh = pohozaev_residual(st)
    return abs(st.omega - 4.8397) <= 0.05 and poh < 1e-4, f"omega={st.omega:.6f} pohozaev={poh:.2e}"


TABLE2 = {7: 5.504, 8: 6.885, 9: 8.161, 10: 9.363, 11: 10.515, 12: 11.623, 13: 12.717, 14: 13.783,
          15: 14.834, 16: 15.873, 17: 16.903, 18: 17.926, 19: 18.944, 20: 19.958, 21: 20.968}


@_timed(5, "limiting frequencies and exponential law")
def c05(cache):
    from .branches import exp_law_fit
    from .shooting import singular_find_state
    ds = list(range(7, 22))
    oinf = {d: singular_find_state(d, 0).omega for d in ds}
    cache["omega_inf"] = oinf
    dev = {d: oinf[d] - TABLE2[d] for d in (7, 8, 10, 16, 21)}
    table_ok = all(abs(v) <= 5e-3 for v in dev.values())
    A, g = exp_law_fit(ds, [oinf[d] for d in ds])
    fit_ok = abs(A - 9.85) <= 0.15 * 9.85 and abs(g - 2.29) <= 0.05 * 2.29
    det = ("deviations " + " ".join(f"d{d}:{v:+.4f}" for d, v in dev.items())
           + f"; fit A={A:.3f} gamma={g:.4f} (targets 9.85, 2.29)")
    return table_ok and fit_ok, det


@_timed(6, "oscillation dichotomy d=7 vs d=16")
def c06(cache):
    from .branches import crossings, sweep_b
    from .shooting import singular_find_state
    br7 = _d7_branch(cache)
    t7 = cache["branch7_time"]
    t0 = time.perf_counter()
    br16 = sweep_b("snh", 16, 0, np.geomspace(0.1, 1e3, 60))
    t16 = time.perf_counter() - t0
    o7 = cache.get("omega_inf", {}).get(7) or singular_find_state(7, 0).omega
    o16 = cache.get("omega_inf", {}).get(16) or singular_find_state(16, 0).omega
    n7, n16 = crossings(br7, o7), crossings(br16, o16)
    ok = (n7 >= 2 and n16 == 0 and t7 <= 600 and t16 <= 600
          and not br7.failures and not br16.failures)
    return ok, (f"d=7 crossings={n7} ({t7:.0f}s, {len(br7.failures)} failures); "
                f"d=16 crossings={n16} ({t16:.0f}s, {len(br16.failures)} failures)")


@_timed(7, "small-b laws")
def c07(cache):
    from .branches import small_b_slope
    from .shooting import ProblemSpec, find_state
    bs = np.array([0.05, 0.1, 0.2])
    parts, ok = [], True
    for kind, d in (("snh", 7), ("gp", 5)):
        q = np.array([(d - find_state(ProblemSpec(kind, d, float(b)), 0).omega) / b ** 2 for b in bs])
        k, y0 = np.polyfit(bs ** 2, q, 1)
        ref = small_b_slope(kind, d)
        rel = abs(y0 - ref) / ref
        ok &= rel < 0.02
        parts.append(f"{kind} d={d}: {y0:.6f} vs {ref:.6f} ({rel:.1e})")
    return ok, "; ".join(parts)


@_timed(8, "stability calibration, small-b slope, second L+ sign change")
def c08(cache):
    from .branches import mass_curve
    from .shooting import ProblemSpec, find_state
    from .stability import HatBasis, assemble_Lpm, calibration, solve_sym
    basis = HatBasis(12.0, 2000)
    lin = calibration(12.0, 2000, basis.order, 7.0, 6)
    cal = np.max(np.abs(lin - (7 + 4 * np.arange(6))) / (7 + 4 * np.arange(6)))
    bs = np.array([0.1, 0.2, 0.4])
    low = []
    for b in bs:
        mats = assemble_Lpm(find_state(ProblemSpec("snh", 7, float(b))), basis)
        low.append(solve_sym(mats, k=1)[1][0])
    slope = np.polyfit(bs ** 2, low, 1)[0]
    ref = -1 / (2 ** 2.5 * 5)
    srel = abs(slope - ref) / abs(ref)

    br = _d7_branch(cache)
    mc = mass_curve(br)
    im = int(mc.mass_maxima[0])
    it = int(mc.turning[0]) if len(mc.turning) else len(br.b) - 1
    second = {}
    cross = None
    for i in range(max(im - 1, 0), min(it + 3, len(br.b))):
        mats = assemble_Lpm(find_state(ProblemSpec("snh", 7, float(br.b[i]))), basis)
        second[i] = solve_sym(mats, k=2)[1][1]
        if i - 1 in second and second[i - 1] > 0 >= second[i]:
            cross = (i - 1, i)
            break
    loc_ok = cross is not None and im in cross
    det = (f"calibration dev={cal:.1e}; slope={slope:.5f} vs {ref:.5f} ({srel:.1%}); "
           f"first M max at b={br.b[im]:.2f}, omega turning at b={br.b[it]:.2f}, "
           + (f"second L+ eigenvalue changes sign on b in [{br.b[cross[0]]:.2f}, {br.b[cross[1]]:.2f}]"
              if cross else "no sign change found"))
    return cal < 5e-3 and srel < 0.05 and loc_ok, det


@_timed(9, "perturbative eigenvalues")
def c09(cache):
    import sympy as sp
    from .stability import perturbative_eigs
    exact = perturbative_eigs("snh", 7, 1, 2, exact=True)
    lam2 = [lv for lv in exact if lv.level == 2][0]
    target = -sp.Rational(43105, 8830976) / sp.sqrt(2) * sp.I
    ex_ok = sp.simplify(lam2.exact - target) == 0
    num = [lv for lv in perturbative_eigs("snh", 7, 1, 2) if lv.level == 2][0]
    num_err = abs(num.coeff - complex(sp.N(target)))
    gp = [lv for lv in perturbative_eigs("gp", 5, 1, 1) if lv.level == 1]
    re = sorted(lv.coeff.real for lv in gp)
    gp_err = max(abs(re[0] + 0.008605), abs(re[1] - 0.008605))
    ok = ex_ok and num_err < 1e-6 and gp_err < 1e-6
    return ok, (f"exact lambda2 coefficient {lam2.exact} (match={ex_ok}); numeric error {num_err:.1e}; "
                f"GP real parts {re[0]:+.7f}, {re[1]:+.7f}")


@_timed(10, "coefficient engine vs oracle and closed forms")
def c10(cache):
    from .coeffs import (gp_snn00_closed, s0000_closed, sk0k0_closed, table_quadrature,
                         table_recursive)
    errs = {}
    for d in (4, 7):
        R = table_recursive(8, d).S
        Q = table_quadrature(8, d)
        errs[d] = float(np.max(np.abs(R - Q) / np.abs(Q)))
    cf = 0.0
    for d in (4, 5, 7):
        T = table_recursive(6, d)
        G = table_recursive(6, d, "gp")
        cf = max(cf, abs(T[0, 0, 0, 0] - s0000_closed(d)))
        for k in range(7):
            cf = max(cf, abs(T[k, k, 0, 0] - sk0k0_closed(k, d)) / abs(sk0k0_closed(k, d)))
            cf = max(cf, abs(G[k, k, 0, 0] - gp_snn00_closed(k, d)) / abs(gp_snn00_closed(k, d)))
    t0 = time.perf_counter()
    table_recursive(30, 4)
    t30 = time.perf_counter() - t0
    ok = max(errs.values()) < 1e-8 and cf < 1e-10 and t30 < 60
    return ok, (f"oracle rel err d4={errs[4]:.1e} d7={errs[7]:.1e}; closed forms {cf:.1e}; "
                f"N=30 build {t30:.2f}s")


@_timed(11, "D' identity stratum")
def c11(cache):
    from .coeffs import d_prime_stratum, table_recursive
    m4, _ = d_prime_stratum(table_recursive(9, 4), 8)
    m3, s3 = d_prime_stratum(table_recursive(9, 3), 8)
    return m4 < 1e-9 and m3 > 1e-3 * s3, f"d=4 max={m4:.1e}; d=3 max={m3:.3g} (scale {s3:.3g})"


@_timed(12, "resonant two-mode run d=4")
def c12(cache):
    from .coeffs import table_recursive
    from .resonant import ModeVector, evolve
    t0 = time.perf_counter()
    a = np.zeros(31, complex)
    a[:2] = 1
    T = 32 * math.pi / math.sqrt(7)
    ev = evolve(ModeVector(a, 4), table_recursive(30, 4), 3 * T, n_samples=601)
    Tm, dist = ev.return_time(T)
    dr = ev.drift()
    dt = time.perf_counter() - t0
    per = abs(Tm - T) / T
    ok = per < 1e-3 and dist < 1e-4 and max(dr.values()) < 1e-8 and dt < 120
    return ok, (f"period {Tm:.6f} vs {T:.6f} ({per:.1e}); return distance {dist:.1e}; "
                f"max drift {max(dr.values()):.1e}; {dt:.1f}s")


@_timed(13, "invariant manifold closure")
def c13(cache):
    from .coeffs import table_recursive
    from .resonant import (ManifoldParams, ModeVector, evolve, manifold_invariants, manifold_seed,
                           oscillator_curve, oscillator_params, reduced_evolve, refit)
    gen = ManifoldParams(0.3 + 0.2j, 0.8 - 0.1j, 0.3 * np.exp(0.7j))
    osc = oscillator_params(*manifold_invariants(gen)[:3])
    seed = manifold_seed(gen, 40)
    res, top = {}, {}
    for d in (4, 3):
        ev = evolve(ModeVector(seed.alphas, d), table_recursive(40, d), osc.period, n_samples=50)
        fits = []
        p = None
        for al in ev.alphas:
            prm, r = refit(al, p)
            p = prm.p
            fits.append(r)
        res[d] = max(fits)
        top[d] = float(np.abs(ev.alphas[:, -1]).max())
    two = ManifoldParams(1 / math.sqrt(2), 1.0, 0.0)
    run = reduced_evolve(two, 2 * oscillator_params(2, 1, 0.25).period)
    yc, _ = oscillator_curve(two, run.t)
    yerr = float(np.max(np.abs(run.y - yc)))
    ok = res[4] < 1e-6 and res[3] > 1e-2 and yerr < 1e-6
    return ok, (f"refit residual d=4 {res[4]:.1e} (top mode up to {top[4]:.1e}), d=3 {res[3]:.2e}; "
                f"reduced y error {yerr:.1e}")


@_timed(14, "resonant approximation scaling")
def c14(cache):
    from .coeffs import table_recursive
    from .resonant import scaling_deviation
    T = table_recursive(8, 4)
    d1 = scaling_deviation(T, [1, 1], 0.1, 1.0)
    d2 = scaling_deviation(T, [1, 1], 0.05, 1.0)
    ratio = d1 / d2
    return 3 <= ratio <= 5, f"deviation {d1:.3e} -> {d2:.3e}, ratio {ratio:.3f}"


CHECKS = [c01, c02, c03, c04, c05, c06, c07, c08, c09, c10, c11, c12, c13, c14]


def run_all(only=None, cache: Optional[dict] = None, echo: Optional[Callable[[str], None]] = None):
    cache = {} if cache is None else cache
    out = []
    for chk in CHECKS:
        if only and chk.number not in only:
            continue
        try:
            res = chk(cache)
        except Exception as exc:  # a crash is a failure, reported as such
            res = CheckResult(chk.number, chk.title, False, f"{type(exc).__name__}: {exc}")
        out.append(res)
        if echo:
            echo(res.line())
    return out
