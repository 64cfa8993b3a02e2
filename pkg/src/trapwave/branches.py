"""Frequency branches omega(b), mass curves and their small/large-b laws."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import gamma

from . import coeffs
from .errors import BracketInvalid, FitDegenerate, SolverError, Unavailable
from .shooting import (BoundState, ProblemSpec, ShootConfig, auto_bracket, find_state, member,
                       singular_find_state)


@dataclass(frozen=True)
class BranchPoint:
    b: float
    omega: float
    mass: float
    c_param: float
    n_nodes: int


@dataclass
class Branch:
    kind: str
    d: float
    n: int
    points: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    omega_infinity: Optional[float] = None

    @property
    def b(self) -> np.ndarray:
        return np.array([p.b for p in self.points])

    @property
    def omega(self) -> np.ndarray:
        return np.array([p.omega for p in self.points])

    @property
    def mass(self) -> np.ndarray:
        return np.array([p.mass for p in self.points])


def _point(st: BoundState) -> BranchPoint:
    return BranchPoint(st.spec.b, st.omega, st.mass, st.shooting_param, len(st.zeros))


def warm_bracket(spec: ProblemSpec, n: int, guess: float, cfg: ShootConfig,
                 rel: float = 0.05) -> tuple[float, float]:
    """Bracket around ``guess`` of relative width ``rel``, widened geometrically."""
    w = max(rel * abs(guess), rel)
    for _ in range(40):
        lo, hi = guess - w, guess + w
        if not member(spec, lo, n, cfg) and member(spec, hi, n, cfg):
            return lo, hi
        w *= 2
    raise BracketInvalid(f"no bracket around {guess}")


def _solve_one(args):
    kind, d, b, n, cfg = args
    spec = ProblemSpec(kind, d, b)
    try:
        return _point(find_state(spec, n, cfg=cfg)), None
    except SolverError as exc:
        return None, (b, type(exc).__name__)


def sweep_b(kind: str, d: float, n: int, b_grid: Sequence[float], cfg: ShootConfig = ShootConfig(),
            jobs: int = 1) -> Branch:
    """Trace a branch over increasing ``b``.

    With ``jobs == 1`` every point warm-starts from a log-log extrapolation of
    the previous shooting parameters; with more jobs the points are solved
    independently in a process pool.
    """
    b_grid = np.asarray(b_grid, dtype=float)
    if np.any(np.diff(b_grid) <= 0) or np.any(b_grid <= 0):
        raise ValueError("b grid must be positive and increasing")
    br = Branch(kind, d, n)
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            for pt, fail in ex.map(_solve_one, [(kind, d, b, n, cfg) for b in b_grid]):
                (br.points.append(pt) if pt else br.failures.append(fail))
        return br
    hist: list = []
    for b in b_grid:
        spec = ProblemSpec(kind, d, float(b))
        try:
            if not hist:
                bracket = auto_bracket(spec, n, cfg)
            else:
                if len(hist) >= 2 and hist[-1][1] > 0 and hist[-2][1] > 0:
                    (b1, c1), (b2, c2) = hist[-2], hist[-1]
                    slope = math.log(c2 / c1) / math.log(b2 / b1)
                    guess = c2 * (b / b2) ** slope
                else:
                    guess = hist[-1][1]
                bracket = warm_bracket(spec, n, guess, cfg)
            st = find_state(spec, n, bracket, cfg=cfg)
        except SolverError as exc:
            br.failures.append((float(b), type(exc).__name__))
            continue
        hist.append((float(b), st.shooting_param))
        br.points.append(_point(st))
    return br


# ---------------------------------------------------------------------------
# small amplitude

def small_b_prediction(kind: str, d: float, n: int, b: float, p: float = 3.0) -> float:
    """Leading small-b frequency of the n-th state bifurcating from ``d + 4n``.

    ``omega = d + 4n - S_nnnn eps^2 / (d-2)`` (nonlocal) or
    ``d + 4n - eps^(p-1) int e_n^(p+1)`` (power law), ``eps = b / e_n(0)``.
    """
    Om = d + 4 * n
    if b == 0:
        return float(Om)
    e0 = coeffs.eval_mode(n, d, 0.0)
    eps = b / e0
    if kind == "snh":
        return float(Om - coeffs.s_quadrature(n, n, n, n, d, "snh")[0] * eps ** 2 / (d - 2))
    if kind == "gp":
        p = 3.0
    elif kind != "power":
        raise ValueError(f"no small-b law for {kind!r}")
    return float(Om - eps ** (p - 1) * coeffs.mode_power_integral(n, d, p + 1))


def small_b_slope(kind: str, d: float, p: float = 3.0) -> float:
    """Closed-form ground-state coefficient: (d - omega) / b^q for small b."""
    if kind == "snh":
        return 1.0 / (2 ** (d / 2) * (d - 2))
    if kind == "gp":
        return 1.0 / 2 ** (d / 2)
    if kind == "power" and p == 5 and d == 3:
        return 1.0 / 3 ** (d / 2)
    raise ValueError("closed form known only for snh, gp and the 3d quintic case")


# ---------------------------------------------------------------------------
# linearization around the singular solution

@dataclass(frozen=True)
class LinearizationReport:
    p: float
    d: float
    beta: float
    alpha1: float
    oscillatory: bool
    roots: tuple
    lam: Optional[float]
    oscillation_boundary: tuple
    mass_critical: float
    energy_critical: float


def mass_critical(p: float) -> float:
    return 4 / (p - 1)


def energy_critical(p: float) -> float:
    return 2 * (p + 1) / (p - 1)


def oscillation_boundary(p: float) -> tuple[float, float]:
    """Dimensions where the characteristic discriminant vanishes."""
    q = 2 * math.sqrt(p / (p - 1))
    base = 3 + 2 / (p - 1)
    return 2 * (base - q), 2 * (base + q)


def linearization_spectrum(p: float, d: float) -> LinearizationReport:
    """Exponents of the Emden-Fowler linearization ``nu'' + B nu' + K nu = 0``.

    ``B = d - 2 - 4/(p-1)``, ``K = 2(d - 2 - 2/(p-1))``.  ``beta`` is the real
    part of the roots and ``alpha1`` half the square root of ``|B^2 - 4K|``.
    For the quadratic nonlocal case the second exponent pair of the coupled
    system supplies the unstable exponent ``lam``.
    """
    B = d - 2 - 4 / (p - 1)
    K = 2 * (d - 2 - 2 / (p - 1))
    disc = B * B - 4 * K
    beta = -B / 2
    alpha1 = math.sqrt(abs(disc)) / 2
    if disc < 0:
        roots = (complex(beta, alpha1), complex(beta, -alpha1))
    else:
        roots = (beta + alpha1, beta - alpha1)
    lam = None
    if p == 2:
        lam = (-d + 6 + math.sqrt(d * d + 4 * d - 28)) / 2 if d * d + 4 * d - 28 >= 0 else None
    return LinearizationReport(p, d, beta, alpha1, disc < 0, roots, lam, oscillation_boundary(p),
                               mass_critical(p), energy_critical(p))


# ---------------------------------------------------------------------------
# large amplitude

@dataclass(frozen=True)
class AsymptoticFit:
    regime: str  # "Oscillatory" or "Monotone"
    A: float
    B_or_delta: float
    beta: float
    alpha1: float
    omega_inf: float
    residual: float

    def model(self, b):
        b = np.asarray(b, dtype=float)
        if self.regime == "Oscillatory":
            return self.omega_inf + self.A * b ** (self.beta / 2) * np.sin(self.alpha1 / 2 * np.log(b) + self.B_or_delta)
        e1, e2 = (self.beta + self.alpha1) / 2, (self.beta - self.alpha1) / 2
        return self.omega_inf + self.A * b ** e1 + self.B_or_delta * b ** e2

    def as_dict(self) -> dict:
        return {"regime": self.regime, "A": self.A, "B_or_delta": self.B_or_delta, "beta": self.beta,
                "alpha1": self.alpha1, "omega_inf": self.omega_inf, "residual": self.residual}


def fit_template(b, omega, omega_inf: float, beta: float, alpha1: float, oscillatory: bool,
                 max_residual: float = 0.2) -> AsymptoticFit:
    """Linear least squares of ``omega - omega_inf`` on the regime template.

    ``A sin(x + delta) = P sin x + Q cos x`` keeps the oscillatory fit linear.
    """
    b = np.asarray(b, dtype=float)
    y = np.asarray(omega, dtype=float) - omega_inf
    if oscillatory:
        env = b ** (beta / 2)
        ph = alpha1 / 2 * np.log(b)
        M = np.column_stack([env * np.sin(ph), env * np.cos(ph)])
    else:
        M = np.column_stack([b ** ((beta + alpha1) / 2), b ** ((beta - alpha1) / 2)])
    coef, *_ = np.linalg.lstsq(M, y, rcond=None)
    res = float(np.linalg.norm(M @ coef - y) / max(np.linalg.norm(y), 1e-300))
    if oscillatory:
        A, delta = float(np.hypot(*coef)), float(np.arctan2(coef[1], coef[0]))
        fit = AsymptoticFit("Oscillatory", A, delta, beta, alpha1, omega_inf, res)
    else:
        fit = AsymptoticFit("Monotone", float(coef[0]), float(coef[1]), beta, alpha1, omega_inf, res)
    if res > max_residual:
        raise FitDegenerate(f"relative residual {res:.3g}")
    return fit


def large_b_fit(branch: Branch, omega_inf: Optional[float] = None, b_min: float = 10.0,
                p: float = 2.0) -> AsymptoticFit:
    """Fit the large-b tail of a branch with exponents fixed by linearization."""
    lin = linearization_spectrum(p, branch.d)
    if omega_inf is None:
        omega_inf = branch.omega_infinity
    if omega_inf is None:
        omega_inf = omega_infinity(branch.kind, branch.d, branch.n)
    sel = branch.b >= b_min
    if sel.sum() < 3:
        raise FitDegenerate("fewer than three points in the large-b regime")
    return fit_template(branch.b[sel], branch.omega[sel], omega_inf, lin.beta, lin.alpha1, lin.oscillatory)


def omega_infinity(kind: str, d: float, n: int = 0, cfg: ShootConfig = ShootConfig()) -> float:
    """Limiting frequency from the singular solution (nonlocal, d >= 7)."""
    if kind != "snh":
        raise Unavailable("singular route implemented for the nonlocal system only")
    if d == 6:
        raise Unavailable("no singular limit in d = 6 (the branch saturates at 0)")
    if d < 7:
        raise Unavailable("singular route needs d >= 7")
    return singular_find_state(d, n, cfg=cfg).omega


def exp_law_fit(ds, omega_inf) -> tuple[float, float]:
    """Fit ``d - omega_inf = A exp(-gamma d)``; returns (A, gamma)."""
    ds = np.asarray(ds, dtype=float)
    y = np.log(ds - np.asarray(omega_inf, dtype=float))
    slope, icpt = np.polyfit(ds, y, 1)
    return float(np.exp(icpt)), float(-slope)


def crossings(branch: Branch, level: float) -> int:
    """Sign changes of ``omega(b) - level`` along the branch."""
    s = np.sign(branch.omega - level)
    s = s[s != 0]
    return int(np.sum(s[1:] != s[:-1]))


# ---------------------------------------------------------------------------
# mass curve

@dataclass(frozen=True)
class MassCurve:
    b: np.ndarray
    omega: np.ndarray
    mass: np.ndarray
    slope: np.ndarray  # dM/domega, nan at turning points
    turning: np.ndarray  # indices where domega/db changes sign
    mass_maxima: np.ndarray  # indices of local maxima of M along b


def mass_curve(branch: Branch) -> MassCurve:
    if len(branch.points) < 2:
        raise ValueError("need at least two points")
    b, w, M = branch.b, branch.omega, branch.mass
    if len(b) == 2:
        dw = np.full(2, w[1] - w[0])
        dM = np.full(2, M[1] - M[0])
    else:
        dw = np.gradient(w, b)
        dM = np.gradient(M, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(dw != 0, dM / dw, np.nan)
    sw = np.sign(dw)
    turning = np.nonzero(sw[1:] * sw[:-1] < 0)[0]
    slope[turning] = np.nan
    sm = np.sign(np.diff(M))
    maxima = np.nonzero((sm[:-1] > 0) & (sm[1:] < 0))[0] + 1
    return MassCurve(b, w, M, slope, turning, maxima)


def small_b_mass_slope(kind: str, d: float) -> float:
    """Limit of M'(omega) as b -> 0 for the ground state."""
    if kind == "snh":
        return -(2 ** (d / 2)) * (d - 2) * gamma(d / 2)
    if kind == "gp":
        return -(2 ** (d / 2)) * gamma(d / 2)
    raise ValueError(kind)
