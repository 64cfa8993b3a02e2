"""Linear stability of bound states.

The operators

    L- = -Delta + V - omega - G(u),      L+ = L- - u G_u(u)

are discretized on piecewise-linear hat functions with radial weight
r^(d-1).  For SNH ``G(u) = h - omega`` is the Newton potential and the
``u G_u`` term is a dense, rank-structured block; for the local problems
both operators are tridiagonal.

Small-b eigenvalues of the full linearization come from first-order
perturbation theory around ``u = 0`` with the interaction coefficients of
:mod:`trapwave.coeffs`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .coeffs import mode_at_origin, s_exact, stab_to_res, table_recursive
from .errors import BasisTooCoarse, CoefficientsUnavailable, GramSingular
from .quad import _gl
from .shooting import POTENTIALS, BoundState


@dataclass(frozen=True)
class HatBasis:
    R: float = 12.0
    N: int = 2000
    order: int = 6

    @property
    def delta(self) -> float:
        return self.R / self.N

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.R, self.N + 1)

    @property
    def size(self) -> int:
        return self.N + 1

    def element_rule(self):
        """Gauss nodes (N, q), weights, and the two local shape functions."""
        t, w = _gl(self.order)
        a = self.nodes[:-1, None]
        h = self.delta
        x = a + h * (t + 1) / 2
        wx = np.broadcast_to(h / 2 * w, x.shape)
        phiR = (x - a) / h
        return x, wx, 1.0 - phiR, phiR

    def partial_rule(self):
        """Rules on [r_e, x_eq] for every element node: shapes (N, q, q)."""
        t, w = _gl(self.order)
        x, _, _, _ = self.element_rule()
        a = self.nodes[:-1, None, None]
        span = x[:, :, None] - a
        xi = a + span * (t + 1) / 2
        wi = span / 2 * w
        phiR = (xi - a) / self.delta
        return xi, wi, 1.0 - phiR, phiR

    def evaluate(self, coeffs, r):
        return np.interp(r, self.nodes, coeffs)

    def refine(self) -> "HatBasis":
        return HatBasis(self.R, 2 * self.N, self.order)


@dataclass
class OperatorMatrices:
    Lminus: np.ndarray
    Lplus: np.ndarray
    Gram: np.ndarray
    basis: HatBasis
    d: float
    omega: float
    kind: str
    dense_plus: bool = False

    @property
    def Lfull(self) -> np.ndarray:
        Z = np.zeros_like(self.Lminus)
        return np.block([[Z, self.Lminus], [-self.Lplus, Z]])


@dataclass
class SpectrumResult:
    lminus_eigs: np.ndarray
    lplus_eigs: np.ndarray
    lfull_eigs: Optional[np.ndarray] = None
    basis: dict = field(default_factory=dict)
    quartet_defect: float = float("nan")
    route: str = ""
    condition: float = float("nan")
    gauge: complex = 0j  # predicted discrete image of the phase zero-mode pair

    def physical(self) -> np.ndarray:
        """Full spectrum without the pair nearest +-gauge (if within 50%)."""
        lams = self.lfull_eigs
        if lams is None or self.gauge == 0:
            return lams
        drop = set()
        for target in (self.gauge, -self.gauge):
            dist = np.abs(lams - target)
            for j in np.argsort(dist):
                if j not in drop:
                    if dist[j] <= 0.5 * abs(self.gauge):
                        drop.add(int(j))
                    break
        return np.delete(lams, sorted(drop))

    @property
    def unstable(self) -> bool:
        lams = self.physical()
        if lams is None or lams.size == 0:
            return False
        return bool(np.max(lams.real) > 1e-6)


@dataclass
class VKReport:
    mass_slope: float
    n_negative: int
    lminus_min: float
    verdict: str

    def as_dict(self) -> dict:
        return {"mass_slope_sign": int(np.sign(self.mass_slope)), "mass_slope": self.mass_slope,
                "n_negative_Lplus": self.n_negative, "lminus_min": self.lminus_min,
                "verdict": self.verdict}


# ---------------------------------------------------------------------------
# assembly

def _tridiag(diag_loc_L, diag_loc_R, off_loc) -> np.ndarray:
    n = len(off_loc) + 1
    diag = np.zeros(n)
    diag[:-1] += diag_loc_L
    diag[1:] += diag_loc_R
    return np.diag(diag) + np.diag(off_loc, 1) + np.diag(off_loc, -1)


def _local(basis: HatBasis, d: float, q):
    """Gram, stiffness and potential matrices for pointwise potential ``q``."""
    x, w, pL, pR = basis.element_rule()
    rho = w * x ** (d - 1)
    G = _tridiag((rho * pL * pL).sum(1), (rho * pR * pR).sum(1), (rho * pL * pR).sum(1))
    s = rho.sum(1) / basis.delta ** 2
    K = _tridiag(s, s, -s)
    qq = rho * q(x)
    P = _tridiag((qq * pL * pL).sum(1), (qq * pR * pR).sum(1), (qq * pL * pR).sum(1))
    return G, K, P


@lru_cache(maxsize=16)
def calibration(R: float, N: int, order: int, d: float, k: int = 6) -> np.ndarray:
    """Lowest ``k`` generalized eigenvalues of -Delta + r^2 on the basis."""
    basis = HatBasis(R, N, order)
    G, K, P = _local(basis, d, lambda x: x * x)
    return sla.eigh(K + P, G, eigvals_only=True, subset_by_index=[0, k - 1])


def check_basis(basis: HatBasis, d: float, tol: float = 0.01) -> float:
    lam0 = calibration(basis.R, basis.N, basis.order, float(d), 6)[0]
    dev = abs(lam0 - d) / d
    if dev > tol:
        raise BasisTooCoarse(f"ground level {lam0:.6g} vs {d} (deviation {dev:.2%})")
    return dev


def newton_block(basis: HatBasis, d: float, u) -> np.ndarray:
    """``M_ij = int int f_i(r) f_j(s) max(r, s)^(2-d) dr ds`` with f_i = chi_i u r^(d-1).

    Entries with disjoint supports factor as T_i H_j; the tridiagonal band is
    integrated exactly across the kernel kink using partial-element rules.
    """
    x, w, pL, pR = basis.element_rule()
    xi, wi, qL, qR = basis.partial_rule()
    g = lambda r: r ** (2.0 - d)
    fo = u(x) * x ** (d - 1)
    fi = u(xi) * xi ** (d - 1)
    n = basis.size
    # whole-element integrals of f and g f for the two local shapes
    FfL, FfR = (w * fo * pL).sum(1), (w * fo * pR).sum(1)
    FgL, FgR = (w * fo * g(x) * pL).sum(1), (w * fo * g(x) * pR).sum(1)
    T = np.zeros(n)
    H = np.zeros(n)
    T[:-1] += FfL
    T[1:] += FfR
    H[:-1] += FgL
    H[1:] += FgR
    # partial integrals from the element start to each Gauss node
    pfL, pfR = (wi * fi * qL).sum(2), (wi * fi * qR).sum(2)
    pgL, pgR = (wi * fi * g(xi) * qL).sum(2), (wi * fi * g(xi) * qR).sum(2)
    FfR_prev = np.concatenate([[0.0], FfR[:-1]])
    FgR_prev = np.concatenate([[0.0], FgR[:-1]])
    gx = g(x)
    HL = H[:-1, None]
    HR = H[1:, None]
    # node e+1 seen from its left element, node e from its right element
    DR = (w * fo * pR * (gx * pfR + HR - pgR)).sum(1)
    DL = (w * fo * pL * (gx * (FfR_prev[:, None] + pfL) + HL - FgR_prev[:, None] - pgL)).sum(1)
    OFF = (w * fo * pL * (gx * pfR + HR - pgR)).sum(1) + H[1:] * FfR_prev

    M = np.triu(np.outer(T, H), 2)
    M = M + M.T
    diag = np.zeros(n)
    diag[:-1] += DL
    diag[1:] += DR
    idx = np.arange(n)
    M[idx, idx] = diag
    M[idx[:-1], idx[1:]] = OFF
    M[idx[1:], idx[:-1]] = OFF
    return M


def _fields(state: BoundState):
    def u(r):
        r = np.asarray(r)
        return state.fields(r.ravel())[0].reshape(r.shape)

    def v(r):
        r = np.asarray(r)
        return state.fields(r.ravel())[2].reshape(r.shape)

    return u, v


def assemble_Lpm(state: Optional[BoundState], basis: HatBasis = HatBasis(), d: Optional[float] = None,
                 omega: Optional[float] = None, check: bool = True) -> OperatorMatrices:
    """Matrices of L-, L+ and the Gram matrix.

    ``state=None`` gives the linear operator ``-Delta + r^2 - omega`` (both
    blocks equal) in dimension ``d``.
    """
    if state is None:
        d = float(d)
        omega = float(d if omega is None else omega)
        kind = "linear"
    else:
        d, omega, kind = state.d, state.omega, state.spec.kind
        if kind == "singular":
            raise ValueError("L+- of a singular solution are not defined on the hat basis")
    if check:
        check_basis(basis, d)
    if kind == "linear":
        G, K, P = _local(basis, d, lambda x: x * x - omega)
        A = K + P
        return OperatorMatrices(A, A.copy(), G, basis, d, omega, kind)

    u, v = _fields(state)
    if kind == "snh":
        G, K, Pm = _local(basis, d, lambda x: x * x - omega - v(x))
        Am = K + Pm
        Ap = Am - 2.0 / (d - 2) * newton_block(basis, d, u)
        return OperatorMatrices(Am, Ap, G, basis, d, omega, kind, dense_plus=True)

    if kind == "gp":
        V, p = (lambda x: x * x), 3.0
    else:
        V, p = POTENTIALS[state.spec.potential][0], state.spec.p
    G, K, Pm = _local(basis, d, lambda x: V(x) - omega - np.abs(u(x)) ** (p - 1))
    _, _, Pp = _local(basis, d, lambda x: V(x) - omega - p * np.abs(u(x)) ** (p - 1))
    return OperatorMatrices(K + Pm, K + Pp, G, basis, d, omega, kind)


def zero_mode_residual(state: BoundState, mats: OperatorMatrices) -> float:
    """``||L- u|| / ||u||`` in the dual norm, using the exact profile.

    The weak form is evaluated against the shooting solution itself, so the
    only error sources are quadrature and the tail glue.
    """
    basis, d = mats.basis, mats.d
    x, w, pL, pR = basis.element_rule()
    u_, v_ = _fields(state)
    uu = u_(x)
    up = state.fields(x.ravel())[1].reshape(x.shape)
    rho = w * x ** (d - 1)
    if mats.kind == "snh":
        q = x * x - mats.omega - v_(x)
    elif mats.kind == "gp":
        q = x * x - mats.omega - uu ** 2
    else:
        V, p = POTENTIALS[state.spec.potential][0], state.spec.p
        q = V(x) - mats.omega - np.abs(uu) ** (p - 1)
    h = basis.delta
    # chi_L' = -1/h, chi_R' = 1/h on each element
    rL = (rho * (-up / h + q * uu * pL)).sum(1)
    rR = (rho * (up / h + q * uu * pR)).sum(1)
    res = np.zeros(basis.size)
    res[:-1] += rL
    res[1:] += rR
    dual = res @ sla.cho_solve(sla.cho_factor(mats.Gram), res)
    norm2 = (rho * uu * uu).sum()
    return float(math.sqrt(max(dual, 0.0) / norm2))


# ---------------------------------------------------------------------------
# eigensolves

def _check_gram(G):
    try:
        return sla.cho_factor(G)
    except np.linalg.LinAlgError as exc:
        raise GramSingular(str(exc)) from exc


def solve_sym(mats: OperatorMatrices, k: Optional[int] = None, vectors: bool = False):
    """Ascending generalized eigenvalues of L- and L+ (lowest ``k`` if given)."""
    _check_gram(mats.Gram)
    sub = None if k is None else [0, min(k, mats.basis.size) - 1]
    out = []
    for A in (mats.Lminus, mats.Lplus):
        out.append(sla.eigh(A, mats.Gram, eigvals_only=not vectors, subset_by_index=sub))
    return tuple(out)


def quartet_defect(lams: np.ndarray) -> float:
    """Largest distance from each eigenvalue's mirror images to the spectrum."""
    lams = np.asarray(lams)
    if lams.size == 0:
        return 0.0
    worst = 0.0
    for img in (-lams, lams.conj(), -lams.conj()):
        dist = np.abs(img[:, None] - lams[None, :]).min(axis=1) / np.maximum(1.0, np.abs(lams))
        worst = max(worst, float(dist.max()))
    return worst


def solve_full(mats: OperatorMatrices, condition: bool = False) -> SpectrumResult:
    """Spectrum of [[0, L-], [-L+, 0]] via lambda^2 = eig(-G^-1 L- G^-1 L+).

    When L+ is positive definite the pencil (L-, G L+^-1 G) is symmetric
    definite and gives real lambda^2; otherwise a nonsymmetric solve is used.
    """
    cg = _check_gram(mats.Gram)
    Am, Ap, G = mats.Lminus, mats.Lplus, mats.Gram
    cond = float("nan")
    try:
        cp = sla.cho_factor(Ap)
        B = G @ sla.cho_solve(cp, G)
        B = 0.5 * (B + B.T)
        nu = sla.eigh(Am, B, eigvals_only=True)
        mu = -nu.astype(complex)
        route, cond = "symmetric", 1.0
    except np.linalg.LinAlgError:
        P = -sla.cho_solve(cg, Am) @ sla.cho_solve(cg, Ap)
        if condition:
            mu, vecs = sla.eig(P)
            cond = float(np.linalg.cond(vecs))
        else:
            mu = sla.eigvals(P)
        route = "nonsymmetric"
    lam = np.sqrt(mu.astype(complex))
    lams = np.concatenate([lam, -lam])
    lams = lams[np.argsort(np.abs(lams), kind="stable")]
    lm, lp = solve_sym(mats, k=10)
    return SpectrumResult(lm, lp, lams, _meta(mats), quartet_defect(lams), route, cond,
                          gauge_estimate(mats))


def gauge_estimate(mats: OperatorMatrices) -> complex:
    """Where discretization moves the double zero eigenvalue from phase invariance.

    The lowest L- eigenvalue ``eps`` replaces the exact zero; a 2x2 reduction on
    (phi, L+^-1 phi) gives ``lambda^2 = -eps / <phi, L+^-1 phi>``.
    """
    if mats.kind == "linear":
        return 0j
    eps, phi = sla.eigh(mats.Lminus, mats.Gram, subset_by_index=[0, 0])
    g = mats.Gram @ phi[:, 0]
    try:
        # rcond is dominated by the r^(d-1) scale of the first rows, not by L+ itself
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            q = float(g @ sla.solve(mats.Lplus, g, assume_a="sym"))
    except np.linalg.LinAlgError:
        return 0j
    if q == 0 or not np.isfinite(q):
        return 0j
    return complex(np.sqrt(complex(-eps[0] / q)))


def _meta(mats: OperatorMatrices) -> dict:
    b = mats.basis
    return {"R": b.R, "N": b.N, "order": b.order, "d": mats.d, "omega": mats.omega, "kind": mats.kind}


def spectrum(state: Optional[BoundState], basis: HatBasis = HatBasis(), k: int = 10, **kw) -> SpectrumResult:
    mats = assemble_Lpm(state, basis, **kw)
    lm, lp = solve_sym(mats, k=k)
    return SpectrumResult(lm, lp, None, _meta(mats))


def vk_verdict(state: BoundState, mass_slope: float, basis: HatBasis = HatBasis(), tol: float = 1e-8,
               turning: bool = False) -> VKReport:
    """Three-condition test: M'(omega) < 0, one negative L+ eigenvalue, L- >= 0.

    ``mass_slope`` is dM/domega from :func:`trapwave.branches.mass_curve`.
    With a single negative L+ eigenvalue a positive slope means instability;
    a second negative L+ eigenvalue combined with a negative slope also gives
    a real unstable pair (odd count).  Other combinations are inconclusive.
    """
    res = spectrum(state, basis, k=6)
    n_neg = int(np.sum(res.lplus_eigs < -tol))
    lmin = float(res.lminus_eigs[0])
    if turning or not np.isfinite(mass_slope):
        verdict = "Inconclusive"
    elif lmin < -tol:
        verdict = "Inconclusive"
    else:
        count = n_neg - (1 if mass_slope < 0 else 0)
        if count == 0:
            verdict = "Stable"
        elif count % 2 == 1:
            verdict = "Unstable"
        else:
            verdict = "Inconclusive"
    return VKReport(float(mass_slope), n_neg, lmin, verdict)


def track_lplus(states: Sequence[BoundState], basis: HatBasis = HatBasis(), k: int = 4) -> np.ndarray:
    """Lowest ``k`` L+ eigenvalues along a branch, following each by overlap.

    Row ``m`` holds the eigenvalues at ``states[m]``; column ``j`` keeps the
    branch that started as the j-th lowest.
    """
    out = np.empty((len(states), k))
    prev = None
    for m, st in enumerate(states):
        mats = assemble_Lpm(st, basis)
        lam, vec = sla.eigh(mats.Lplus, mats.Gram, subset_by_index=[0, k - 1])
        if prev is not None:
            ov = np.abs(prev.T @ mats.Gram @ vec)
            order = np.full(k, -1)
            taken = set()
            for j in np.argsort(-ov.max(axis=1)):
                cand = [c for c in np.argsort(-ov[j]) if c not in taken]
                order[j] = cand[0]
                taken.add(cand[0])
            lam, vec = lam[order], vec[:, order]
        out[m] = lam
        prev = vec
    return out


# ---------------------------------------------------------------------------
# perturbation theory around u = 0

@dataclass
class PerturbedLevel:
    level: int  # lambda^(0) = 4 i level
    coeff: complex  # lambda^(1), the b^2 coefficient
    degenerate: bool
    exact: Optional[object] = None  # sympy expression when requested

    @property
    def lam0(self) -> complex:
        return 4j * self.level

    def at(self, b: float) -> complex:
        return self.lam0 + self.coeff * b * b


def _elements(kind: str, d, n: int, S, exact: bool):
    """Matrix elements <e_k, U- e_l> and <e_k, U+ e_l> from stability-ordered S."""
    pref = (1 if kind == "gp" else 1 / (d - 2))
    if exact:
        import sympy as sp
        pref = sp.Integer(1) if kind == "gp" else sp.Rational(1, int(d) - 2)

    def um(k, l):
        return pref * ((S(n, n, n, n) if k == l else 0) - S(k, l, n, n))

    def up(k, l):
        return um(k, l) - 2 * pref * S(k, n, l, n)

    return um, up


def perturbative_eigs(kind: str, d, n: int, k_max: int = 3, exact: bool = False,
                      table=None) -> list[PerturbedLevel]:
    """b^2 corrections to the linearization spectrum at levels 0..k_max.

    Only levels with ``lambda^(0) = 4 i m``, m >= 0, are returned; the rest
    follow by negation and conjugation.  Levels m <= n are doubly degenerate
    (pairs (n+m, +) and (n-m, -)) and use the 2x2 secular equation, which
    returns both roots.
    """
    if kind not in ("snh", "gp"):
        raise ValueError("perturbative eigenvalues need the harmonic trap (snh or gp)")
    need = max(k_max + n, n) + 0
    if exact:
        import sympy as sp
        cache = {}

        def S(a, b, c, e):
            key = stab_to_res(a, b, c, e)
            if key not in cache:
                cache[key] = s_exact(*key, int(d), kind)
            return cache[key]

        e0 = sp.Integer(2) * sp.gamma(n + sp.Integer(d) / 2) / (
            sp.factorial(n) * sp.gamma(sp.Integer(d) / 2) ** 2)
        I = sp.I
        sqrt = sp.sqrt
    else:
        t = table if table is not None else table_recursive(need, d, kind)
        if t.N_max < need:
            raise CoefficientsUnavailable(f"table reaches {t.N_max}, need {need}")

        def S(a, b, c, e):
            return float(t[stab_to_res(a, b, c, e)])

        e0 = mode_at_origin(n, d) ** 2
        I = 1j
        sqrt = lambda z: np.sqrt(complex(z))
    um, up = _elements(kind, d, n, S, exact)
    pre = I / (2 * e0)
    out = []
    for m in range(k_max + 1):
        k = n + m
        l = n - m
        dp = pre * (um(k, k) + up(k, k))
        if l < 0:
            out.append(_level(m, dp, False, exact))
            continue
        dm = -pre * (um(l, l) + up(l, l))
        x = pre * (-um(k, l) + up(k, l))
        y = -x  # complex conjugate of a purely imaginary element
        disc = sqrt((dp - dm) ** 2 + 4 * x * y)
        for s in (1, -1):
            out.append(_level(m, (dp + dm + s * disc) / 2, True, exact))
    return out


def _level(m, val, deg, exact) -> PerturbedLevel:
    if exact:
        import sympy as sp
        val = sp.nsimplify(sp.simplify(val))
        return PerturbedLevel(m, complex(sp.N(val, 30)), deg, val)
    return PerturbedLevel(m, complex(val), deg)
