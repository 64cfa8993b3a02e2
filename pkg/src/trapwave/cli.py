"""Command-line front end.

Every subcommand writes '#'-headed CSV/JSON files plus ``manifest.json`` into
the output directory (``--out``, else $TRAPWAVE_OUT, else ``./trapwave-out``).
Exit codes: 0 success, 2 usage error, 3 solver error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import io as tio
from .errors import SolverError

log = logging.getLogger("trapwave")

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument parsing

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output directory (default $TRAPWAVE_OUT or ./trapwave-out)")
    p.add_argument("--config", help="file of 'key = value' lines overriding defaults")
    p.add_argument("--reproducible", action="store_true", help="omit dates and wall times from outputs")
    p.add_argument("--figures", action="store_true", help="also render PNG figures (needs matplotlib)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for branch sweeps")
    p.add_argument("-v", "--verbose", action="store_true")


def _problem(p: argparse.ArgumentParser, kinds=("snh", "gp", "power", "singular")) -> None:
    p.add_argument("--kind", choices=kinds, default="snh")
    p.add_argument("--d", type=float, default=7.0, help="spatial dimension")
    p.add_argument("--n", type=int, default=0, help="number of nodes")
    p.add_argument("--p", type=float, default=3.0, help="power-law exponent (kind=power)")
    p.add_argument("--potential", default="r2", help="trap for kind=power")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trapwave", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"trapwave {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("shoot", help="construct one bound state")
    _problem(s)
    s.add_argument("--b", type=float, default=1.0, help="central amplitude u(0)")
    s.add_argument("--tol", type=float, default=None, help="bisection tolerance")
    s.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"))
    s.add_argument("--rtol", type=float, default=1e-12, help="integrator relative tolerance")
    _common(s)

    b = sub.add_parser("branch", help="sweep a branch omega(b)")
    _problem(b, ("snh", "gp", "power"))
    b.add_argument("--bmin", type=float, default=0.1)
    b.add_argument("--bmax", type=float, default=1000.0)
    b.add_argument("--points", type=int, default=60)
    b.add_argument("--fit-bmin", type=float, default=10.0, help="smallest b used in the large-b fit")
    _common(b)

    st = sub.add_parser("stability", help="L+- spectra, full linearization and VK verdict")
    _problem(st, ("snh", "gp", "power"))
    st.add_argument("--b", type=float, nargs="+", default=[0.5])
    st.add_argument("--R", type=float, default=12.0)
    st.add_argument("--N", type=int, default=2000)
    st.add_argument("--eigs", type=int, default=10, help="number of L+- eigenvalues exported")
    st.add_argument("--full", action="store_true", help="also solve the full linearization")
    st.add_argument("--full-N", type=int, default=600, help="basis size for the full solve")
    st.add_argument("--perturbative", type=int, default=None, metavar="KMAX",
                    help="emit b^2 eigenvalue corrections up to level KMAX")
    _common(st)

    c = sub.add_parser("coeffs", help="interaction coefficient table")
    c.add_argument("--kind", choices=("snh", "gp"), default="snh")
    c.add_argument("--d", type=float, default=4.0)
    c.add_argument("--nmax", type=int, default=10)
    c.add_argument("--check-oracle", type=int, default=0, metavar="K",
                   help="compare K evenly spaced entries against quadrature")
    _common(c)

    r = sub.add_parser("resonant", help="evolve the resonant system")
    r.add_argument("--d", type=float, default=4.0)
    r.add_argument("--N", type=int, default=30)
    r.add_argument("--seed", choices=("two-mode", "manifold", "file", "zero"), default="two-mode")
    r.add_argument("--seed-file", help="JSON {a:[re,im], b:[re,im], p:[re,im]} or {modes: [[re,im], ...]}")
    r.add_argument("--periods", type=float, default=3.0, help="run length in units of the d=4 period")
    r.add_argument("--t-end", type=float, default=None)
    r.add_argument("--samples", type=int, default=601)
    r.add_argument("--rtol", type=float, default=1e-10)
    _common(r)

    rp = sub.add_parser("repro", help="run the acceptance checks and print a pass/fail table")
    rp.add_argument("--only", type=int, nargs="+", help="criterion numbers to run")
    _common(rp)
    return ap


def resolve(args: argparse.Namespace, parser: argparse.ArgumentParser, argv=None) -> dict:
    """Defaults < config file < explicit flags; returns the effective config."""
    argv = sys.argv[1:] if argv is None else list(argv)
    cfg = vars(args).copy()
    if args.config:
        try:
            fromfile = tio.read_config_file(args.config)
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        sub = parser._subparsers._group_actions[0].choices[args.command]
        explicit = {a.dest for a in sub._actions
                    if any(tok == opt or tok.startswith(opt + "=") for opt in a.option_strings for tok in argv)}
        types = {a.dest: a for a in sub._actions}
        for k, v in fromfile.items():
            if k not in types:
                raise UsageError(f"unknown config key {k!r}")
            if k in explicit:
                continue
            act = types[k]
            conv = act.type or (lambda x: x)
            if act.nargs in ("+", 2):
                cfg[k] = [conv(x) for x in v.split()]
            elif isinstance(act, argparse._StoreTrueAction):
                cfg[k] = v.lower() in ("1", "true", "yes", "on")
            else:
                cfg[k] = conv(v)
    cfg.pop("config", None)
    cfg["out"] = cfg.get("out") or os.environ.get("TRAPWAVE_OUT") or "trapwave-out"
    cfg.pop("verbose", None)
    return cfg


# ---------------------------------------------------------------------------
# commands

def _spec(cfg, b=None):
    from .shooting import ProblemSpec
    return ProblemSpec(cfg["kind"], cfg["d"], b, cfg.get("p", 3.0), cfg.get("potential", "r2"))


def cmd_shoot(cfg: dict):
    from .shooting import ShootConfig, find_state, frequency_bounds, pohozaev_residual, singular_find_state
    sc = ShootConfig(rel_tol=cfg["rtol"], abs_tol=cfg["rtol"] * 1e-2)
    br = tuple(cfg["bracket"]) if cfg.get("bracket") else None
    if cfg["kind"] == "singular":
        st = singular_find_state(cfg["d"], cfg["n"], br, cfg["tol"], sc)
    else:
        st = find_state(_spec(cfg, cfg["b"]), cfg["n"], br, cfg["tol"], sc)
    rec = st.to_record()
    out = Path(cfg["out"])
    rows = zip(rec["grid"], rec["u"], rec["h"] or [float("nan")] * len(rec["grid"]))
    files = [tio.write_csv(out / "profile.csv", ["r", "u", "h"], rows, cfg, cfg["reproducible"])]
    trace_rows = [(i + 1, c) for i, c in enumerate(st.trace)]
    files.append(tio.write_csv(out / "bisection.csv", ["iteration", "c"], trace_rows, cfg, cfg["reproducible"]))
    results = {"omega": st.omega, "omega_err": st.omega_err, "shooting_param": st.shooting_param,
               "mass": st.mass, "energy": st.energy, "R_glue": st.R_glue, "zeros": list(st.zeros),
               "pohozaev_residual": _safe(lambda: pohozaev_residual(st))}
    if cfg["kind"] in ("snh", "gp", "singular"):
        results["frequency_bounds"] = frequency_bounds(st)
    if cfg["figures"]:
        from . import figures
        files.append(figures.profile(out / "profile.png", rec["grid"], rec["u"], rec["h"] or None,
                                     f"{cfg['kind']} d={cfg['d']:g} n={cfg['n']}"))
    return files, results


def _safe(fn):
    try:
        return fn()
    except (NotImplementedError, SolverError):
        return None


def cmd_branch(cfg: dict):
    from .branches import crossings, large_b_fit, linearization_spectrum, mass_curve, omega_infinity, sweep_b
    from .errors import FitDegenerate, Unavailable
    grid = np.geomspace(cfg["bmin"], cfg["bmax"], cfg["points"])
    br = sweep_b(cfg["kind"], cfg["d"], cfg["n"], grid, jobs=cfg["jobs"])
    if not br.points:
        raise SolverError("no branch point converged")
    out = Path(cfg["out"])
    rows = [(p.b, p.omega, p.mass, p.c_param, p.n_nodes) for p in br.points]
    files = [tio.write_csv(out / "branch.csv", ["b", "omega", "mass", "c", "n_nodes"], rows, cfg,
                           cfg["reproducible"])]
    report = {"failures": br.failures, "omega_at_bmin": br.points[0].omega}
    try:
        oinf = omega_infinity(cfg["kind"], cfg["d"], cfg["n"])
        br.omega_infinity = oinf
        report["omega_infinity"] = oinf
        report["crossings"] = crossings(br, oinf)
    except (Unavailable, SolverError) as exc:
        oinf = None
        report["omega_infinity"] = None
        report["omega_infinity_note"] = str(exc)
    if cfg["kind"] == "snh":
        lin = linearization_spectrum(2.0, cfg["d"])
        report["linearization"] = {"beta": lin.beta, "alpha1": lin.alpha1, "oscillatory": lin.oscillatory,
                                   "lambda": lin.lam}
        if oinf is not None:
            try:
                report["fit"] = large_b_fit(br, oinf, cfg["fit_bmin"]).as_dict()
            except FitDegenerate as exc:
                report["fit"] = None
                report["fit_note"] = str(exc)
    if len(br.points) >= 3:
        mc = mass_curve(br)
        report["mass_maxima_b"] = [float(br.b[i]) for i in mc.mass_maxima]
        report["omega_turning_b"] = [float(br.b[i]) for i in mc.turning]
    files.append(tio.write_json(out / "fit.json", report, cfg, cfg["reproducible"]))
    if cfg["figures"]:
        from . import figures
        files.append(figures.branch(out / "branch.png", br.b, br.omega, br.mass, oinf))
    return files, report


def cmd_stability(cfg: dict):
    from .branches import mass_curve, sweep_b
    from .shooting import find_state
    from .stability import HatBasis, assemble_Lpm, perturbative_eigs, solve_full, solve_sym, vk_verdict
    out = Path(cfg["out"])
    basis = HatBasis(cfg["R"], cfg["N"])
    sym_rows, full_rows, vk, full_info = [], [], [], []
    for b in cfg["b"]:
        st = find_state(_spec(cfg, b), cfg["n"])
        mats = assemble_Lpm(st, basis)
        lm, lp = solve_sym(mats, k=cfg["eigs"])
        sym_rows += [(b, i, lp[i], lm[i]) for i in range(len(lp))]
        if cfg["n"] == 0:
            # dM/domega from two neighbouring states
            h = 1e-3 * b
            br = sweep_b(cfg["kind"], cfg["d"], 0, [b - h, b + h])
            mc = mass_curve(br)
            rep = vk_verdict(st, float(np.nanmean(mc.slope)), basis)
            vk.append({"b": b, **rep.as_dict()})
        if cfg["full"]:
            fm = assemble_Lpm(st, HatBasis(cfg["R"], cfg["full_N"]))
            sp = solve_full(fm, condition=True)
            lam = sp.lfull_eigs[np.abs(sp.lfull_eigs) < 4 * (cfg["eigs"] + 1)]
            full_rows += [(b, z.real, z.imag, i) for i, z in enumerate(lam)]
            full_info.append({"b": b, "route": sp.route, "quartet_defect": sp.quartet_defect,
                              "condition": sp.condition, "gauge_pair": sp.gauge,
                              "unstable": sp.unstable})
    files = [tio.write_csv(out / "lpm.csv", ["b", "eig_index", "lplus", "lminus"], sym_rows, cfg,
                           cfg["reproducible"])]
    report = {"vk": vk}
    if cfg["full"]:
        report["full"] = full_info
        files.append(tio.write_csv(out / "lfull.csv", ["b", "re_lambda", "im_lambda", "branch_id"], full_rows,
                                   cfg, cfg["reproducible"]))
        if cfg["figures"]:
            from . import figures
            files.append(figures.spectrum(out / "lfull.png", [complex(r[1], r[2]) for r in full_rows]))
    if cfg.get("perturbative") is not None:
        levels = perturbative_eigs(cfg["kind"], cfg["d"], cfg["n"], cfg["perturbative"])
        report["perturbative"] = [{"level": lv.level, "lambda0": lv.lam0, "lambda1": lv.coeff,
                                   "degenerate": lv.degenerate} for lv in levels]
    files.append(tio.write_json(out / "vk.json", report, cfg, cfg["reproducible"]))
    return files, report


def cmd_coeffs(cfg: dict):
    from .coeffs import s_quadrature, table_recursive, write_table
    out = Path(cfg["out"])
    t = table_recursive(cfg["nmax"], cfg["d"], cfg["kind"])
    path = out / f"coeffs_{cfg['kind']}_d{cfg['d']:g}_N{cfg['nmax']}.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    write_table(t, path)
    report = {"S0000": float(t[0, 0, 0, 0]), "entries": int(t.S.size)}
    k = cfg["check_oracle"]
    if k:
        idx = np.unravel_index(np.linspace(0, t.S.size - 1, k).astype(int), t.S.shape)
        worst = 0.0
        for ijkl in zip(*idx):
            ijkl = tuple(int(x) for x in ijkl)
            v, _ = s_quadrature(*ijkl, cfg["d"], cfg["kind"], rtol=1.0)
            worst = max(worst, abs(float(t[ijkl]) - v) / max(abs(v), 1e-300))
        report["oracle_max_rel_dev"] = worst
        report["oracle_samples"] = k
    files = [path, tio.write_json(out / "coeffs_report.json", report, cfg, cfg["reproducible"])]
    return files, report


def _load_seed(cfg, N):
    from .resonant import ManifoldParams, ModeVector, manifold_seed
    d = cfg["d"]
    if cfg["seed"] == "zero":
        return ModeVector(np.zeros(N + 1), d)
    if cfg["seed"] == "two-mode":
        return manifold_seed(ManifoldParams(1 / math.sqrt(2), 1.0, 0.0), N, d)
    if not cfg.get("seed_file"):
        raise UsageError("--seed manifold/file needs --seed-file")
    with open(cfg["seed_file"]) as fh:
        doc = json.load(fh)
    if "modes" in doc:
        al = np.zeros(N + 1, complex)
        m = [complex(*x) if isinstance(x, list) else complex(x) for x in doc["modes"]][: N + 1]
        al[: len(m)] = m
        return ModeVector(al, d)
    prm = ManifoldParams(*(complex(*doc[k]) for k in ("a", "b", "p")))
    return manifold_seed(prm, N, d)


def cmd_resonant(cfg: dict):
    from .coeffs import table_recursive
    from .resonant import conserved, evolve
    out = Path(cfg["out"])
    N = cfg["N"]
    st = _load_seed(cfg, N)
    table = table_recursive(N, cfg["d"])
    c0 = conserved(st, table)
    from .resonant import oscillator_params
    T = None
    try:
        T = oscillator_params(c0.N_mass, c0.J, c0.S).period if c0.N_mass > 0 else None
    except SolverError:
        pass
    t_end = cfg["t_end"] or (cfg["periods"] * T if T else 100.0)
    ev = evolve(st, table, t_end, cfg["samples"], rtol=cfg["rtol"])
    rows = [(t, n, abs(a), a.real, a.imag) for t, al in zip(ev.t, ev.alphas) for n, a in enumerate(al)]
    files = [tio.write_csv(out / "modes.csv", ["t", "n", "abs_alpha", "re_alpha", "im_alpha"], rows, cfg,
                           cfg["reproducible"])]
    crow = [(t, *c.as_row()) for t, c in zip(ev.t, ev.conserved)]
    files.append(tio.write_csv(out / "conserved.csv", ["t", "N", "J", "H", "absZ"], crow, cfg,
                               cfg["reproducible"]))
    report = {"t_end": t_end, "drift": ev.drift(), "predicted_period": T}
    if T and c0.N_mass > 0 and t_end >= T:
        Tm, dist = ev.return_time(T)
        report.update(measured_period=Tm, return_distance=dist)
    files.append(tio.write_json(out / "resonant.json", report, cfg, cfg["reproducible"]))
    if cfg["figures"]:
        from . import figures
        files.append(figures.modes(out / "modes.png", ev.t, ev.alphas))
    return files, report


def cmd_repro(cfg: dict):
    from .acceptance import run_all
    res = run_all(set(cfg["only"]) if cfg.get("only") else None, echo=print)
    rows = [(r.number, int(r.passed), r.seconds, r.detail.replace(",", ";")) for r in res]
    out = Path(cfg["out"])
    files = [tio.write_csv(out / "acceptance.csv", ["criterion", "passed", "seconds", "detail"], rows, cfg,
                           cfg["reproducible"])]
    return files, {"passed": sum(r.passed for r in res), "total": len(res)}


COMMANDS = {"shoot": cmd_shoot, "branch": cmd_branch, "stability": cmd_stability, "coeffs": cmd_coeffs,
            "resonant": cmd_resonant, "repro": cmd_repro}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        cfg = resolve(args, parser, argv)
        files, results = COMMANDS[args.command](cfg)
        tio.write_manifest(cfg["out"], cfg, files, results, time.perf_counter() - t0, cfg["reproducible"])
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, TypeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.command == "repro":
        return EXIT_OK
    print(json.dumps(tio._jsonable(results), sort_keys=True, default=str)[:2000])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
