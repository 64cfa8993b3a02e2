"""Radial ODE systems with a regular singular point at the origin.

A system with ``k`` unknowns is written as

    u_i'' + (m / r) u_i' + f_i(r, u) = 0,       i = 0..k-1,

where ``m`` is the friction exponent (``d - 1`` for the usual radial
Laplacian).  The state vector interleaves values and derivatives:
``[u_0, u_0', u_1, u_1', ...]``.

Starting data at ``r_start > 0`` come from a truncated power series that is
built by successive approximation: given the force series
``f = sum_k f_k r^k`` (``k >= -1``) of the current iterate, the next iterate is

    u = u(0) - sum_k f_k r^(k+2) / ((k + m + 1)(k + 2)).

Each pass fixes at least one more order, so a handful of passes give an
exact Taylor polynomial of the requested degree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import DOP853, OdeSolution
from scipy.optimize import brentq, minimize_scalar
from scipy.special import binom, gamma, jv

from .errors import InsufficientData, StepSizeUnderflow

ForceFn = Callable[[float, np.ndarray], np.ndarray]
SeriesForceFn = Callable[[list], list]


# ---------------------------------------------------------------------------
# truncated power series helpers (coefficient arrays, index = power of r)

def smul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product of two series truncated to the length of ``a``."""
    K = len(a)
    return np.convolve(a, b)[:K]


def sshift(a: np.ndarray, j: int) -> np.ndarray:
    """Multiply by r**j (j >= 0), keeping the length."""
    out = np.zeros_like(a)
    if j < len(a):
        out[j:] = a[: len(a) - j]
    return out


def spow_signed(a: np.ndarray, p: float) -> np.ndarray:
    """Series of |u|^(p-1) u for a series with nonzero constant term."""
    a0 = a[0]
    K = len(a)
    delta = a / a0
    delta[0] = 0.0
    out = np.zeros(K)
    out[0] = 1.0
    term = np.zeros(K)
    term[0] = 1.0
    for m in range(1, K):
        term = smul(term, delta)
        if not term.any():
            break
        out += binom(p, m) * term
    return np.sign(a0) * abs(a0) ** p * out


def with_pole(a: np.ndarray, pole: float = 0.0) -> np.ndarray:
    """Pack a regular force series into the layout used by ``series_force``.

    Index 0 holds the r**-1 coefficient, index k+1 the r**k coefficient.
    """
    return np.concatenate([[pole], a])


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialSystem:
    """A radial second-order system ``u'' + (m/r) u' + f(r, u) = 0``.

    Attributes
    ----------
    d : float
        Spatial dimension (may be fractional).
    friction : float
        Coefficient ``m`` of the ``u'/r`` term.
    force : callable
        ``force(r, values) -> array`` of the ``f_i``.  ``values`` holds the
        unknowns only, not their derivatives.
    n_unknowns : int
    series_force : callable, optional
        Maps a list of coefficient arrays (one per unknown) to the force
        series in the layout of :func:`with_pole`.  Needed for series starts.
    names : tuple of str
    """

    d: float
    friction: float
    force: ForceFn
    n_unknowns: int = 1
    series_force: Optional[SeriesForceFn] = None
    names: tuple = ("u",)
    shift: tuple = ()  # constant added to each unknown for events and output

    def offsets(self) -> np.ndarray:
        """Per-component offsets turning integration variables into reported ones."""
        off = np.zeros(2 * self.n_unknowns)
        for i, s in enumerate(self.shift):
            off[2 * i] = s
        return off

    def rhs(self, r: float, y: np.ndarray) -> np.ndarray:
        vals = y[0::2]
        ders = y[1::2]
        f = np.asarray(self.force(r, vals), dtype=float)
        out = np.empty_like(y)
        out[0::2] = ders
        out[1::2] = -self.friction / r * ders - f
        return out


def taylor_coefficients(system: RadialSystem, init: Sequence[float], order: int = 4) -> list:
    """Power-series coefficients of every unknown up to ``r**order``."""
    if system.series_force is None:
        raise ValueError("system has no registered series force; cannot build a Taylor start")
    k = system.n_unknowns
    init = [float(v) for v in init]
    if len(init) != k:
        raise ValueError(f"expected {k} initial values, got {len(init)}")
    K = order + 1
    m = system.friction
    coeffs = []
    for v in init:
        c = np.zeros(K)
        c[0] = v
        coeffs.append(c)
    for _ in range(order + 2):
        forces = system.series_force(coeffs)
        new = []
        for v, g in zip(init, forces):
            c = np.zeros(K)
            c[0] = v
            # g[j] is the coefficient of r**(j-1)
            for j in range(min(len(g), K - 1)):
                kk = j - 1
                c[kk + 2] = -g[j] / ((kk + m + 1) * (kk + 2))
            new.append(c)
        coeffs = new
    return coeffs


def series_start(system: RadialSystem, init: Sequence[float], r_start: float, order: int = 4) -> np.ndarray:
    """State vector at ``r_start`` from the degree-``order`` Taylor polynomial."""
    if not r_start > 0:
        raise ValueError("r_start must be positive")
    coeffs = taylor_coefficients(system, init, order)
    state = []
    for c in coeffs:
        p = np.polynomial.Polynomial(c)
        state += [p(r_start), p.deriv()(r_start)]
    return np.array(state)


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Event:
    kind: str  # "zero", "dzero" or "blowup"
    index: int
    r: float
    slope: float = float("nan")


@dataclass
class EventLog:
    events: list = field(default_factory=list)

    def pattern(self, index: int = 0) -> list:
        """Sequence of 'Z'/'D' markers for one unknown, in order of r."""
        tag = {"zero": "Z", "dzero": "D"}
        return [tag[e.kind] for e in self.events if e.index == index and e.kind in tag]

    def zeros(self, index: int = 0) -> list:
        return [e.r for e in self.events if e.index == index and e.kind == "zero"]

    def __len__(self) -> int:
        return len(self.events)


@dataclass(frozen=True)
class IntegrationConfig:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    r_max: float = 20.0
    blowup_threshold: float = 1e8
    track: Optional[tuple] = None  # unknown indices to watch for events


@dataclass(frozen=True)
class Trajectory:
    grid: np.ndarray
    states: np.ndarray
    terminal: str  # "ReachedRmax", "BlowUp" or "EventStop"
    r_stop: float
    sol: Optional[object] = None
    names: tuple = ("u",)

    def value(self, i: int = 0) -> np.ndarray:
        return self.states[:, 2 * i]

    def deriv(self, i: int = 0) -> np.ndarray:
        return self.states[:, 2 * i + 1]

    def __call__(self, r):
        if self.sol is None:
            raise ValueError("trajectory has no dense output")
        return self.sol(r)


class _ShiftedSolution:
    """Dense solution with the system offsets applied."""

    def __init__(self, sol: OdeSolution, off: np.ndarray):
        self.sol = sol
        self.off = off
        self.t_min, self.t_max = sol.t_min, sol.t_max

    def __call__(self, t):
        v = self.sol(t)
        return v + (self.off if v.ndim == 1 else self.off[:, None])


def _refine(fun, a: float, b: float, xtol: float = 1e-14) -> float:
    return brentq(fun, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps)


def integrate(
    system: RadialSystem,
    start: np.ndarray,
    r_start: float,
    config: IntegrationConfig = IntegrationConfig(),
    stop: Optional[Callable[[EventLog], bool]] = None,
) -> tuple[Trajectory, EventLog]:
    """Integrate outward from ``r_start`` with an adaptive 8(5,3) Runge-Kutta pair.

    Events (sign changes of each watched value and derivative) are located by
    root polishing on the dense interpolant.  Integration ends at ``r_max``,
    when any value exceeds ``blowup_threshold``, or when ``stop(log)`` turns
    true after a new event.
    """
    y0 = np.asarray(start, dtype=float)
    k = system.n_unknowns
    off = system.offsets()
    track = range(k) if config.track is None else config.track
    solver = DOP853(system.rhs, r_start, y0, config.r_max,
                    rtol=config.rel_tol, atol=config.abs_tol)
    grid = [r_start]
    states = [y0 + off]
    ts = [r_start]
    interps = []
    log = EventLog()
    terminal = "ReachedRmax"
    r_stop = config.r_max
    thr = config.blowup_threshold

    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise StepSizeUnderflow(f"{msg} at r={solver.t:.6g}")
        t_old, t_new = solver.t_old, solver.t
        y_old, y_new = states[-1], solver.y + off
        raw = solver.dense_output()

        def dense(t, raw=raw):
            v = raw(t)
            return v + (off if v.ndim == 1 else off[:, None])
        new_events = []
        for i in track:
            for kind, col in (("zero", 2 * i), ("dzero", 2 * i + 1)):
                a, b = y_old[col], y_new[col]
                if a == 0.0 or np.sign(a) == np.sign(b):
                    continue
                # a root sitting exactly on t_new is picked up by the next step
                if b == 0.0:
                    continue
                rr = _refine(lambda t, c=col: dense(t)[c], t_old, t_new)
                st = raw(rr)
                slope = st[col + 1] if kind == "zero" else system.rhs(rr, st)[col]
                new_events.append(Event(kind, i, rr, float(slope)))
        blown = np.max(np.abs(y_new[0::2])) > thr or not np.all(np.isfinite(y_new))
        r_blow = None
        if blown:
            def excess(t):
                return np.max(np.abs(dense(t)[0::2])) - thr
            if np.all(np.isfinite(y_new)):
                r_blow = _refine(excess, t_old, t_new)
            else:
                r_blow = t_old
            new_events = [e for e in new_events if e.r <= r_blow]
        new_events.sort(key=lambda e: e.r)
        stop_at = None
        for e in new_events:
            log.events.append(e)
            if stop is not None and stop(log):
                stop_at = e.r
                break
        ts.append(t_new)
        interps.append(raw)
        if stop_at is not None:
            grid.append(stop_at)
            states.append(dense(stop_at))
            terminal, r_stop = "EventStop", stop_at
            break
        if blown:
            grid.append(r_blow)
            states.append(dense(r_blow))
            log.events.append(Event("blowup", int(np.argmax(np.abs(dense(r_blow)[0::2]))), r_blow))
            terminal, r_stop = "BlowUp", r_blow
            break
        grid.append(t_new)
        states.append(y_new.copy())

    sol = _ShiftedSolution(OdeSolution(np.array(ts), interps), off) if interps else None
    traj = Trajectory(np.array(grid), np.array(states), terminal, r_stop, sol, system.names)
    return traj, log


# ---------------------------------------------------------------------------
# blow-up fitting

def fit_power_law(r: np.ndarray, y: np.ndarray, r_lo: float, r_hi: float) -> tuple[float, float, float]:
    """Fit ``y ~ A (r* - r)^alpha`` with r* searched on ``(r_lo, r_hi)``.

    The exponent and log-amplitude enter linearly, so only r* is searched.
    """
    s = np.sign(y[-1])
    ly = np.log(np.abs(y))

    def resid(rs):
        x = np.log(rs - r)
        M = np.column_stack([np.ones_like(x), x])
        coef, *_ = np.linalg.lstsq(M, ly, rcond=None)
        return np.sum((M @ coef - ly) ** 2), coef

    res = minimize_scalar(lambda rs: resid(rs)[0], bounds=(r_lo, r_hi), method="bounded",
                          options={"xatol": 1e-12})
    rs = res.x
    _, (la, alpha) = resid(rs)
    return float(rs), float(alpha), float(s * np.exp(la))


def detect_blowup_exponent(traj: Trajectory, index: Optional[int] = None, decades: float = 1.0,
                           n_samples: int = 200) -> dict:
    """Fit the terminal power-law growth of each unknown.

    Returns ``{index: (r_star, alpha, amplitude)}``.  The window is the last
    ``decades`` of growth of ``|u_i|`` before the blow-up threshold.
    """
    if traj.terminal != "BlowUp" or traj.sol is None:
        raise InsufficientData("trajectory did not terminate in a blow-up")
    idxs = range(traj.states.shape[1] // 2) if index is None else [index]
    out = {}
    r_end = traj.r_stop
    for i in idxs:
        ytop = abs(traj.states[-1, 2 * i])
        vals = np.abs(traj.value(i))
        inwin = np.nonzero(vals < ytop / 10 ** decades)[0]
        if len(inwin) == 0:
            raise InsufficientData(f"unknown {i}: growth window not resolved")
        r_a = traj.grid[inwin[-1]]
        r = np.linspace(r_a, r_end, n_samples)
        y = traj.sol(r)[2 * i]
        keep = np.abs(y) >= ytop / 10 ** decades
        r, y = r[keep], y[keep]
        if len(r) < 20:
            raise InsufficientData(f"unknown {i}: only {len(r)} points in the growth window")
        width = r_end - r[0]
        out[i] = fit_power_law(r, y, r_end + 1e-9 * width, r_end + 2 * width)
    return out


# ---------------------------------------------------------------------------
# reference systems

def bessel_system(d: float) -> RadialSystem:
    """``u'' + (d-1)u'/r + u = 0``: the large-c limit of the SNH profile."""
    return RadialSystem(d, d - 1, lambda r, v: v, 1,
                        lambda cs: [with_pole(cs[0])], ("u",))


def bessel_limit(d: float, b: float, r) -> np.ndarray:
    """Closed-form regular solution of :func:`bessel_system` with ``u(0) = b``."""
    r = np.asarray(r, dtype=float)
    nu = d / 2 - 1
    with np.errstate(invalid="ignore", divide="ignore"):
        out = b * gamma(d / 2) * 2 ** nu * r ** (-nu) * jv(nu, r)
    return np.where(r == 0, b, out)


def oscillator_system(d: float, omega: float) -> RadialSystem:
    """Linear trapped oscillator ``u'' + (d-1)u'/r - r^2 u + omega u = 0``."""
    def force(r, v):
        return (omega - r * r) * v

    def sforce(cs):
        u = cs[0]
        return [with_pole(omega * u - sshift(u, 2))]

    return RadialSystem(d, d - 1, force, 1, sforce, ("u",))
