"""Resonant and spectral mode dynamics.

Mode amplitudes alpha_n multiply the oscillator eigenmodes e_n.  The
resonant flow keeps only quartets with n + j = k + l,

    i d(alpha_n)/dt = sum_j sum_k C[n, j, k, n+j-k] conj(alpha_j) alpha_k alpha_{n+j-k},

with ``C`` the (j <-> k) symmetrization of the interaction table.  Summands
whose last index exceeds the truncation N are dropped.  The full spectral
system keeps every quartet with its phase e^{4 i (n+j-k-l) t}.

In d = 4 the flow has an extra conserved quantity Z and a three-complex-
dimensional invariant manifold on which y = |p|^2/(1-|p|^2) oscillates
harmonically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import least_squares

from .coeffs import CoeffTable, eval_mode, symmetrize, table_recursive
from .errors import InadmissibleInvariants, LeftDisk, PNotInDisk, TableTooSmall, ToleranceFailure


@dataclass
class ModeVector:
    alphas: np.ndarray
    d: float
    t: float = 0.0

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=complex)
        if not np.all(np.isfinite(self.alphas)):
            raise ValueError("non-finite mode amplitude")

    @property
    def N(self) -> int:
        return len(self.alphas) - 1


@dataclass
class ConservedSet:
    N_mass: float
    J: float
    H: float
    Z: Optional[complex] = None

    @property
    def S(self) -> float:
        """Invariant with ``H = (N^2 - 6 S^2) / 4`` (d = 4 bookkeeping)."""
        arg = (self.N_mass ** 2 - 4 * self.H) / 6
        return math.sqrt(max(arg, 0.0))

    def as_row(self) -> list:
        return [self.N_mass, self.J, self.H, abs(self.Z) if self.Z is not None else float("nan")]


@dataclass
class ManifoldParams:
    a: complex
    b: complex
    p: complex

    @property
    def y(self) -> float:
        q = abs(self.p) ** 2
        if q >= 1:
            raise PNotInDisk(f"|p| = {abs(self.p)}")
        return q / (1 - q)


@dataclass(frozen=True)
class OscillatorParams:
    omega: float
    A: float
    y0: float

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega


# ---------------------------------------------------------------------------
# right-hand sides

class ResonantSystem:
    """Flattened quartet list of the truncated resonant flow."""

    def __init__(self, table: CoeffTable, N: Optional[int] = None):
        N = table.N_max if N is None else N
        if N > table.N_max:
            raise TableTooSmall(f"table reaches {table.N_max}, truncation is {N}")
        C = symmetrize(table).S if table.kind == "snh" else table.S
        n, j, k = np.meshgrid(np.arange(N + 1), np.arange(N + 1), np.arange(N + 1), indexing="ij")
        l = n + j - k
        keep = (l >= 0) & (l <= N)
        self.n, self.j, self.k, self.l = n[keep], j[keep], k[keep], l[keep]
        self.C = np.asarray(C[self.n, self.j, self.k, self.l], dtype=float)
        self.N = N
        self.d = table.d

    def force(self, a: np.ndarray) -> np.ndarray:
        """``sum C conj(a_j) a_k a_l`` for every n (equals i d(alpha)/dt)."""
        terms = self.C * np.conj(a[self.j]) * a[self.k] * a[self.l]
        m = self.N + 1
        return (np.bincount(self.n, terms.real, minlength=m)
                + 1j * np.bincount(self.n, terms.imag, minlength=m))

    def __call__(self, t, a):
        return -1j * self.force(a)


def resonant_rhs(state: ModeVector, table: CoeffTable) -> np.ndarray:
    if state.N > table.N_max:
        raise TableTooSmall(f"state has N={state.N}, table {table.N_max}")
    return ResonantSystem(table, state.N)(state.t, state.alphas)


class SpectralSystem:
    """Full cubic mode system in the interaction picture with amplitude ``eps``."""

    def __init__(self, table: CoeffTable, N: Optional[int] = None, eps: float = 1.0):
        N = table.N_max if N is None else N
        if N > table.N_max:
            raise TableTooSmall(f"table reaches {table.N_max}, truncation is {N}")
        self.S = np.asarray(table.S[: N + 1, : N + 1, : N + 1, : N + 1], dtype=float)
        self.N = N
        self.eps2 = eps * eps
        self.freq = 4.0 * np.arange(N + 1)

    def force(self, t, a, resonant_only: bool = False) -> np.ndarray:
        if resonant_only:
            idx = np.arange(self.N + 1)
            m = (idx[:, None, None, None] + idx[None, :, None, None]
                 - idx[None, None, :, None] - idx[None, None, None, :])
            out = np.einsum("njkl,j,k,l->n", np.where(m == 0, self.S, 0.0), np.conj(a), a, a)
            return self.eps2 * out
        # e^{4i(n+j-k-l)t} = ph_n ph_j / (ph_k ph_l), folded into beta = a / ph
        ph = np.exp(1j * self.freq * t)
        beta = a / ph
        out = ph * np.einsum("njkl,j,k,l->n", self.S, np.conj(beta), beta, beta, optimize=True)
        return self.eps2 * out

    def __call__(self, t, a):
        return -1j * self.force(t, a)


def full_spectral_rhs(state: ModeVector, table: CoeffTable, t: float, eps: float = 1.0,
                      resonant_only: bool = False) -> np.ndarray:
    sysm = SpectralSystem(table, state.N, eps)
    return -1j * sysm.force(t, state.alphas, resonant_only)


# ---------------------------------------------------------------------------
# conserved quantities

def conserved(state: ModeVector, table: Optional[CoeffTable] = None, system: Optional[ResonantSystem] = None) -> ConservedSet:
    a = state.alphas
    n = np.arange(len(a))
    Nm = float(np.sum(np.abs(a) ** 2))
    J = float(np.sum(n * np.abs(a) ** 2))
    if system is None:
        system = ResonantSystem(table, state.N)
    H = 0.5 * float(np.real(np.vdot(a, system.force(a))))
    Z = None
    if state.d == 4:
        Z = complex(np.sum(np.sqrt((n[:-1] + 1) * (n[:-1] + 2)) * np.conj(a[1:]) * a[:-1]))
    return ConservedSet(Nm, J, H, Z)


def z_rate(state: ModeVector, system: ResonantSystem) -> complex:
    """dZ/dt along the resonant flow, evaluated algebraically."""
    a = state.alphas
    ad = system(0.0, a)
    n = np.arange(len(a) - 1)
    w = np.sqrt((n + 1) * (n + 2))
    return complex(np.sum(w * (np.conj(ad[1:]) * a[:-1] + np.conj(a[1:]) * ad[:-1])))


# ---------------------------------------------------------------------------
# time integration

@dataclass
class Evolution:
    t: np.ndarray
    alphas: np.ndarray  # (len(t), N+1)
    d: float
    conserved: list = field(default_factory=list)
    sol: object = field(default=None, repr=False)

    def drift(self) -> dict:
        """Largest relative change of each conserved quantity from t = 0."""
        rows = np.array([c.as_row() for c in self.conserved])
        out = {}
        for name, col in zip(("N", "J", "H", "absZ"), rows.T):
            if np.all(np.isnan(col)):
                continue
            ref = max(abs(col[0]), 1e-300)
            out[name] = float(np.max(np.abs(col - col[0])) / ref)
        return out

    def abs_at(self, t) -> np.ndarray:
        return np.abs(self.sol(t)).T

    def return_distance(self, t) -> float:
        """``max_n | |alpha_n(t)| - |alpha_n(0)| |``."""
        return float(np.max(np.abs(np.abs(self.sol(t)) - np.abs(self.alphas[0]))))

    def return_time(self, guess: float, width: float = 0.2) -> tuple[float, float]:
        """Local minimizer of the return distance within ``guess*(1 +- width)``."""
        from scipy.optimize import minimize_scalar
        ts = np.linspace(guess * (1 - width), min(guess * (1 + width), self.t[-1]), 801)
        dist = np.array([self.return_distance(s) for s in ts])
        i = int(np.argmin(dist))
        lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)]
        res = minimize_scalar(self.return_distance, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10 * guess})
        return float(res.x), float(res.fun)


def _integrate(fun, a0, t_end, n_samples, rtol, atol):
    t_eval = np.linspace(0.0, t_end, n_samples)
    sol = solve_ivp(fun, (0.0, t_end), np.asarray(a0, dtype=complex), method="DOP853",
                    t_eval=t_eval, rtol=rtol, atol=atol, dense_output=True)
    if sol.status != 0:
        raise ToleranceFailure(sol.message)
    return sol


def evolve(state: ModeVector, table: CoeffTable, t_end: float, n_samples: int = 301,
           rtol: float = 1e-10, atol: float = 1e-13) -> Evolution:
    """Adaptive DOP853 integration of the truncated resonant flow."""
    system = ResonantSystem(table, state.N)
    sol = _integrate(system, state.alphas, t_end, n_samples, rtol, atol)
    al = sol.y.T
    cons = [conserved(ModeVector(a, state.d, t), system=system) for t, a in zip(sol.t, al)]
    return Evolution(sol.t, al, state.d, cons, sol.sol)


def evolve_spectral(state: ModeVector, table: CoeffTable, eps: float, t_slow: float,
                    n_samples: int = 101, rtol: float = 1e-10, atol: float = 1e-13) -> Evolution:
    """Full spectral system over slow time ``t_slow`` (fast time t_slow/eps^2).

    Returned times are slow times, so the result compares directly with
    :func:`evolve`.
    """
    system = SpectralSystem(table, state.N, eps)
    sol = _integrate(system, state.alphas, t_slow / eps ** 2, n_samples, rtol, atol)
    scale = eps ** 2
    dense = sol.sol
    return Evolution(sol.t * scale, sol.y.T, state.d, [], lambda t: dense(np.asarray(t) / scale))


def scaling_deviation(table: CoeffTable, alphas, eps: float, t_slow: float = 1.0, N: Optional[int] = None,
                      n_samples: int = 101) -> float:
    """Sup over time and modes of |alpha_full - alpha_resonant| on [0, t_slow]."""
    N = table.N_max if N is None else N
    a0 = np.zeros(N + 1, complex)
    a0[: len(alphas)] = alphas
    st = ModeVector(a0, table.d)
    res = evolve(st, table, t_slow, n_samples)
    full = evolve_spectral(st, table, eps, t_slow, n_samples)
    ts = np.linspace(0, t_slow, n_samples)
    return float(np.max(np.abs(full.sol(ts) - res.sol(ts))))


# ---------------------------------------------------------------------------
# invariant manifold (d = 4)

def manifold_seed(params: ManifoldParams, N: int, d: float = 4) -> ModeVector:
    a, b, p = complex(params.a), complex(params.b), complex(params.p)
    if abs(p) >= 1:
        raise PNotInDisk(f"|p| = {abs(p)}")
    n = np.arange(N + 1)
    if p == 0:
        al = np.zeros(N + 1, complex)
        al[0] = b
        if N >= 1:
            al[1] = math.sqrt(2) * a
    else:
        al = np.sqrt(n + 1) * (b + a / p * n) * p ** n
    return ModeVector(al, d)


def truncation_tail(state: ModeVector) -> float:
    m = np.abs(state.alphas)
    return float(m[-1] / m.max()) if m.max() > 0 else 0.0


def _ansatz_basis(p: complex, N: int):
    n = np.arange(N + 1)
    s = np.sqrt(n + 1)
    pn = p ** n
    dn = np.zeros(N + 1, complex)
    dn[1:] = n[1:] * p ** (n[1:] - 1)
    return np.stack([s * pn, s * dn], axis=1)


def refit(alphas, p_guess: Optional[complex] = None) -> tuple[ManifoldParams, float]:
    """Least-squares (a, b, p) for a mode vector; returns params and relative residual.

    For fixed p the ansatz is linear in (b, a); only p is searched.
    """
    al = np.asarray(alphas, dtype=complex)
    N = len(al) - 1
    scale = np.linalg.norm(al)

    def inner(p):
        B = _ansatz_basis(p, N)
        coef, *_ = np.linalg.lstsq(B, al, rcond=None)
        return coef, al - B @ coef

    def fun(x):
        r = inner(complex(x[0], x[1]))[1] / scale
        return np.concatenate([r.real, r.imag])

    if p_guess is None:
        beta = al / np.sqrt(np.arange(N + 1) + 1)
        m = min(N - 1, 12)
        if m >= 2:
            A = np.stack([beta[1:m], beta[:m - 1]], axis=1)
            c, *_ = np.linalg.lstsq(A, beta[2:m + 1], rcond=None)
            p_guess = c[0] / 2
        else:
            p_guess = 0.0
        if not np.isfinite(p_guess) or abs(p_guess) >= 1:
            p_guess = 0.0
    sol = least_squares(fun, [p_guess.real if isinstance(p_guess, complex) else float(p_guess),
                              p_guess.imag if isinstance(p_guess, complex) else 0.0],
                        xtol=1e-15, ftol=1e-15, gtol=1e-15)
    p = complex(sol.x[0], sol.x[1])
    coef, r = inner(p)
    res = float(np.linalg.norm(r) / scale)
    return ManifoldParams(coef[1], coef[0], p), res


def manifold_invariants(params: ManifoldParams) -> tuple[float, float, float, complex]:
    """(N, J, S, Z) of the ansatz in closed form."""
    a, b, p = params.a, params.b, params.p
    y = params.y
    A2, B2 = abs(a) ** 2, abs(b) ** 2
    re = (np.conj(a) * b * p).real
    N = (1 + y) ** 2 * (2 * (1 + y) * (1 + 3 * y) * A2 + B2 + 4 * (1 + y) * re)
    J = (1 + y) ** 2 * (2 * (1 + y) * (1 + 9 * y + 12 * y * y) * A2 + 2 * y * B2
                        + 4 * (1 + y) * (1 + 3 * y) * re)
    S = A2 * (1 + y) ** 4 / 2
    Z = (2 * (1 + y) ** 3 * (6 * (1 + y) * (1 + 2 * y) * A2 + B2 + 6 * (1 + y) * re) * np.conj(p)
         + 2 * (1 + y) ** 3 * np.conj(a) * b)
    return float(N), float(J), float(S), complex(Z)


def reduced_rhs(t, z):
    """Three-ODE system for (p, a, b) packed as a complex 3-vector."""
    p, a, b = z
    q = abs(p) ** 2
    if q >= 1:
        raise LeftDisk(f"|p| = {math.sqrt(q)} at t = {t}")
    y = q / (1 - q)
    A2, B2 = abs(a) ** 2, abs(b) ** 2
    abp = np.conj(a) * b * p
    pd = (1 + y) ** 2 * (2 * A2 * p * (1 + y) + a * np.conj(b)) / 16
    ad = (a * (1 + y) ** 3 * (10 * A2 * (1 + 3 * y) + 20 * (a * np.conj(b) * np.conj(p)).real
                              + 4 * abp) / 16 + 7 / 16 * a * (1 + y) ** 2 * B2)
    bd = (3 / 8 * a * np.conj(p) * (1 + y) ** 4 * (2 * (1 + 2 * y) * A2 + a * np.conj(b) * np.conj(p))
          + b * (1 + y) ** 2 * ((1 + y) * (1 + 3 * y) * A2 + B2 / 2 + 2 * (1 + y) * abp.real))
    return -1j * np.array([pd, ad, bd])


@dataclass
class ReducedRun:
    t: np.ndarray
    p: np.ndarray
    a: np.ndarray
    b: np.ndarray
    sol: object = field(repr=False, default=None)

    @property
    def y(self) -> np.ndarray:
        q = np.abs(self.p) ** 2
        return q / (1 - q)

    def params(self, t) -> ManifoldParams:
        p, a, b = self.sol(t)
        return ManifoldParams(a, b, p)


def reduced_evolve(params: ManifoldParams, t_end: float, n_samples: int = 501,
                   rtol: float = 1e-12, atol: float = 1e-14) -> ReducedRun:
    params.y  # disk check
    z0 = np.array([params.p, params.a, params.b], dtype=complex)
    sol = solve_ivp(reduced_rhs, (0.0, t_end), z0, method="DOP853", rtol=rtol, atol=atol,
                    t_eval=np.linspace(0, t_end, n_samples), dense_output=True)
    if sol.status != 0:
        raise ToleranceFailure(sol.message)
    return ReducedRun(sol.t, sol.y[0], sol.y[1], sol.y[2], sol.sol)


def oscillator_params(N: float, J: float, S: float, tol: float = 1e-12) -> OscillatorParams:
    den = N * N + 48 * S * S
    arg = 2 * S * (4 * S - N) * (48 * S * S - 2 * N * J - J * J)
    if arg < -tol * max(1.0, den ** 2):
        raise InadmissibleInvariants(f"amplitude argument {arg:.3g} < 0")
    omega = math.sqrt(den) / 16
    A = math.sqrt(max(arg, 0.0)) / den
    y0 = -0.5 * (1 - (N + J) * (N + 4 * S) / den)
    return OscillatorParams(omega, A, y0)


def oscillator_curve(params: ManifoldParams, t):
    """Closed-form y(t) = A cos(omega t + phi) + y0 for manifold data."""
    N, J, S, _ = manifold_invariants(params)
    osc = oscillator_params(N, J, S)
    y_init = params.y
    p = complex(params.p)
    pd = reduced_rhs(0.0, np.array([params.p, params.a, params.b], complex))[0]
    ydot = 2 * (np.conj(p) * pd).real / (1 - abs(p) ** 2) ** 2
    phi = math.atan2(-ydot / osc.omega, y_init - osc.y0) if osc.A > 0 else 0.0
    return osc.A * np.cos(osc.omega * np.asarray(t) + phi) + osc.y0, osc


# ---------------------------------------------------------------------------

def decompose(profile, N: int, panels: int = 400) -> tuple[ModeVector, float]:
    """Mode amplitudes ``<e_n, u>`` of a bound state and the Parseval gap M - sum |alpha_n|^2."""
    d = profile.d
    from .quad import gl_nodes
    R = max(profile.R_glue + 12.0, math.sqrt(4 * N + d) + 8.0)
    x, w = gl_nodes(np.linspace(0, R, panels + 1), 16)
    u = profile.fields(x)[0]
    wr = w * x ** (d - 1) * u
    al = np.array([np.sum(wr * eval_mode(n, d, x)) for n in range(N + 1)])
    gap = float(profile.mass - np.sum(al ** 2))
    return ModeVector(al.astype(complex), d), gap
