"""Oscillator eigenmodes and the quartic interaction coefficients.

Index convention
----------------
``S[i, j, k, l]`` pairs ``(i, l)`` at the outer radius and ``(j, k)`` at the
inner one::

    S_ijkl = int int e_i(r) e_l(r) e_j(s) e_k(s) (r s)^(d-1) / max(r, s)^(d-2) ds dr

This is the ordering used by the resonant system.  The stability analysis
pairs the first two and the last two indices instead; use
:func:`stab_to_res` to translate.  The local (cubic) coefficients
``chi_ijkl = int e_i e_j e_k e_l r^(d-1) dr`` are fully symmetric.

The recursive engine follows the ladder scheme: chi by a four-term recursion
in the first index, ``X`` from chi, off-diagonal ``U_ijkl`` (``j != k``)
from a Wronskian identity, the ``U_i00l`` ladder, and a lift in the repeated
index for ``U_ijjl``; finally ``S_ijkl = U_ijkl + U_jilk``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .errors import IndexOutOfTable, QuadratureNoConvergence
from .quad import SplitKernel, gl_nodes


def omega_n(n: int, d: float) -> float:
    return d + 4 * n


def c_coef(n, d: float):
    """Ladder coefficient ``sqrt(n (n + d/2 - 1))``."""
    n = np.asarray(n, dtype=float)
    return np.sqrt(n * (n + d / 2 - 1))


def modes(N: int, d: float, r) -> np.ndarray:
    """Rows ``e_0 .. e_N`` at radii ``r`` by the upward three-term recurrence.

    ``r^2 e_n = -c_{n+1} e_{n+1} + (2n + d/2) e_n - c_n e_{n-1}``.
    """
    r = np.asarray(r, dtype=float)
    x = r * r
    out = np.zeros((N + 1,) + r.shape)
    out[0] = math.sqrt(2 / math.gamma(d / 2)) * np.exp(-x / 2)
    if N >= 1:
        out[1] = (d / 2 - x) * out[0] / c_coef(1, d)
    for m in range(1, N):
        out[m + 1] = ((2 * m + d / 2 - x) * out[m] - c_coef(m, d) * out[m - 1]) / c_coef(m + 1, d)
    return out


def eval_mode(n: int, d: float, r):
    """``e_n(r)``; scalar in, scalar out."""
    v = modes(n, d, r)[n]
    return float(v) if np.ndim(v) == 0 else v


def mode_at_origin(n: int, d: float) -> float:
    return math.sqrt(2 * math.exp(gammaln(n + d / 2) - gammaln(n + 1))) / math.gamma(d / 2)


def radial_extent(n_max: int, d: float) -> float:
    """Radius beyond which every e_n (n <= n_max) is below ~1e-17 of its size."""
    return math.sqrt(4 * n_max + d) + 8.0


def mode_power_integral(n: int, d: float, q: float, panels: int = 64) -> float:
    """``int |e_n|^q r^(d-1) dr``."""
    x, w = gl_nodes(np.linspace(0, radial_extent(n, d), panels + 1), 20)
    return float(np.sum(w * np.abs(eval_mode(n, d, x)) ** q * x ** (d - 1)))


# ---------------------------------------------------------------------------
# closed forms

def s0000_closed(d: float) -> float:
    return 2 ** (1 - d / 2) / math.gamma(d / 2)


def sk0k0_closed(k: int, d: float) -> float:
    """Nonlocal coefficient with pairs (k, 0), (k, 0).

    Verified against quadrature; reduces to :func:`s0000_closed` at ``k = 0``.
    """
    lg = (gammaln(d / 2 + 2 * k - 1) - gammaln(k + 1) - gammaln(d / 2) - gammaln(d / 2 + k))
    return (d - 2) * math.exp(lg) / 2 ** (d / 2 + 2 * k)


def sk0k0_printed(k: int, d: float) -> float:
    """The published variant, which differs from quadrature by ``(d-2)^2``."""
    return sk0k0_closed(k, d) / (d - 2) ** 2


def gp_snn00_closed(n: int, d: float) -> float:
    lg = gammaln(d / 2 + 2 * n) - gammaln(n + 1) - gammaln(d / 2) - gammaln(d / 2 + n)
    return math.exp(lg) / 2 ** (d / 2 + 2 * n - 1)


def chi0000(d: float) -> float:
    return 1 / (2 ** (d / 2 - 1) * math.gamma(d / 2))


def u0000(d: float) -> float:
    return 1 / (2 ** (d / 2) * math.gamma(d / 2))


def stab_to_res(a: int, b: int, c: int, d_: int) -> tuple:
    """Index map from the stability pairing (a b)(c d) to ``S`` ordering."""
    return (a, c, d_, b)


# ---------------------------------------------------------------------------
# quadrature oracle

def _oracle_tables(N: int, d: float, panels: int, order: int):
    R = radial_extent(N, d)
    sk = SplitKernel(np.linspace(0, R, panels + 1), order)
    n = N + 1
    Ex = modes(N, d, sk.x)
    Ei = modes(N, d, sk.xi)
    PPo = Ex[:, None, :] * Ex[None, :, :]
    PPi = Ei[:, None] * Ei[None, :]
    A, _ = sk.cumulative(PPo * sk.x ** (d - 1), PPi * sk.xi ** (d - 1))
    _, B = sk.cumulative(PPo * sk.x, PPi * sk.xi)
    K = A * sk.x ** (2 - d) + B
    wr = sk.w * sk.x ** (d - 1)
    S = np.einsum("iq,lq,jkq,q->ijkl", Ex, Ex, K, wr, optimize=True)
    G = np.einsum("iq,jq,kq,lq,q->ijkl", Ex, Ex, Ex, Ex, wr, optimize=True)
    return S, G


def table_quadrature(N: int, d: float, kind: str = "snh", panels: int = 40, order: int = 24,
                     with_error: bool = False):
    """All coefficients up to index N by composite Gauss-Legendre in r.

    The error estimate is the difference from a run with doubled panels.
    """
    S, G = _oracle_tables(N, d, panels, order)
    T = S if kind == "snh" else G
    if not with_error:
        return T
    S2, G2 = _oracle_tables(N, d, 2 * panels, order)
    T2 = S2 if kind == "snh" else G2
    return T2, np.abs(T2 - T)


def s_quadrature(i: int, j: int, k: int, l: int, d: float, kind: str = "snh",
                 convention: str = "resonant", rtol: float = 1e-11) -> tuple[float, float]:
    """One coefficient and an absolute error estimate.

    ``convention='stability'`` reads the indices as pairs (i j)(k l).
    """
    if convention == "stability":
        i, j, k, l = stab_to_res(i, j, k, l)
    N = max(i, j, k, l)
    if N > 30:
        raise QuadratureNoConvergence("indices above 30 are outside the oracle envelope")
    T, err = table_quadrature(N, d, kind, panels=24, order=24, with_error=True)
    v, e = float(T[i, j, k, l]), float(err[i, j, k, l])
    if e > rtol * max(abs(v), 1e-300) and e > 1e-15:
        raise QuadratureNoConvergence(f"error estimate {e:.3g} for value {v:.6g}")
    return v, e


def _laguerre_coeffs(n: int, alpha):
    """Exact power-series coefficients of the generalized Laguerre polynomial."""
    import sympy as sp
    return [sp.Integer(-1) ** m * sp.binomial(n + alpha, n - m) / sp.factorial(m)
            for m in range(n + 1)]


def _polymul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def s_exact(i: int, j: int, k: int, l: int, d: int, kind: str = "snh"):
    """Exact symbolic coefficient (resonant ordering) as a sympy expression.

    Each product of two modes is a polynomial in x = r^2 times e^{-x}.  The
    nonlocal kernel then reduces to moments of the lower incomplete gamma
    function,

        int_0^inf x^m e^{-x} gamma(a, x) dx = m! sum_{j<=m} Gamma(a+j) / (j! 2^(a+j)),

    so the result is a finite sum of gamma values.
    """
    import sympy as sp
    d = sp.Integer(d)
    alpha = d / 2 - 1
    norm = lambda n: sp.sqrt(2 * sp.factorial(n) / sp.gamma(n + d / 2))
    pre = norm(i) * norm(j) * norm(k) * norm(l)
    A = _polymul(_laguerre_coeffs(i, alpha), _laguerre_coeffs(l, alpha))
    B = _polymul(_laguerre_coeffs(j, alpha), _laguerre_coeffs(k, alpha))
    if kind == "gp":
        P = _polymul(A, B)
        tot = sum(c * sp.gamma(m + d / 2) / 2 ** (m + d / 2) for m, c in enumerate(P)) / 2
        return sp.nsimplify(sp.simplify(pre * tot))

    def F(m, a):
        return sp.factorial(m) * sum(sp.gamma(a + q) / (sp.factorial(q) * 2 ** (a + q))
                                     for q in range(m + 1))

    def half(P, Q):
        return sum(p * q * F(m, n + d / 2) for m, p in enumerate(P) for n, q in enumerate(Q)) / 4

    return sp.simplify(pre * (half(A, B) + half(B, A)))


# ---------------------------------------------------------------------------
# recursive engine

def _sorted_keys(M: int):
    for L in range(0, 4 * M + 1):
        for a in range(min(M, L), -1, -1):
            for b in range(min(a, L - a), -1, -1):
                for c in range(min(b, L - a - b), -1, -1):
                    e = L - a - b - c
                    if 0 <= e <= c:
                        yield a, b, c, e


def chi_table(N_max: int, d: float, dtype=np.float64) -> np.ndarray:
    """Fully symmetric local coefficients for indices ``<= N_max``.

    The recursion raises the largest index of a sorted key by one::

        4 c_{i+1} chi_{i+1,jkl} = -2 c_i chi_{i-1,jkl} + 2 c_j chi_{i,j-1,kl}
                                  + 2 c_k chi_{ij,k-1,l} + 2 c_l chi_{ijk,l-1}
                                  + (d + 6i - 2(j+k+l)) chi_ijkl
    """
    M = N_max
    cc = [dtype(0)] + [dtype(math.sqrt(n * (n + d / 2 - 1))) for n in range(1, M + 2)]
    store: dict = {(0, 0, 0, 0): dtype(chi0000(d))}

    def get(a, b, c, e):
        if a < 0 or b < 0 or c < 0 or e < 0:
            return dtype(0)
        return store[tuple(sorted((a, b, c, e), reverse=True))]

    for key in _sorted_keys(M):
        if key == (0, 0, 0, 0):
            continue
        a, j, k, l = key
        i = a - 1
        v = (2 * cc[j] * get(i, j - 1, k, l) + 2 * cc[k] * get(i, j, k - 1, l)
             + 2 * cc[l] * get(i, j, k, l - 1) + dtype(d + 6 * i - 2 * (j + k + l)) * get(i, j, k, l))
        if i >= 1:
            v -= 2 * cc[i] * get(i - 1, j, k, l)
        store[key] = v / (4 * cc[a])
    keys = np.array(list(store.keys()), dtype=np.intp)
    vals = np.array(list(store.values()), dtype=dtype)
    out = np.zeros((M + 1,) * 4, dtype=dtype)
    for perm in itertools.permutations(range(4)):
        k = keys[:, perm]
        out[k[:, 0], k[:, 1], k[:, 2], k[:, 3]] = vals
    return out


@dataclass
class CoeffTable:
    """Four-index coefficient table with provenance.

    ``route`` counts, per entry, how many of the two ``U`` terms came from the
    diagonal ladders (0, 1 or 2); it is ``None`` for quadrature and local tables.
    """

    d: float
    N_max: int
    kind: str
    provenance: str
    S: np.ndarray
    route: Optional[np.ndarray] = field(default=None, repr=False)

    def __getitem__(self, idx):
        try:
            if min(idx) < 0:
                raise IndexError
            return self.S[idx]
        except IndexError:
            raise IndexOutOfTable(f"index {idx} outside table of size {self.N_max}") from None


def table_recursive(N_max: int, d: float, kind: str = "snh", dtype=None) -> CoeffTable:
    """Coefficient table by recursion.  Extended precision is used above 24."""
    if dtype is None:
        dtype = np.longdouble if N_max > 24 else np.float64
    if kind == "gp":
        chi = chi_table(N_max, d, dtype)
        return CoeffTable(d, N_max, "gp", "Recursive", chi.astype(np.float64))
    if kind != "snh":
        raise ValueError(kind)
    M = N_max + 3
    n = N_max + 1
    cc = np.array([math.sqrt(m * (m + d / 2 - 1)) for m in range(M + 3)], dtype=dtype)
    E = np.array([2 * m + d / 2 for m in range(M + 3)], dtype=dtype)
    Ch = np.zeros((M + 2,) * 4, dtype=dtype)
    Ch[: M + 1, : M + 1, : M + 1, : M + 1] = chi_table(M, d, dtype)
    # X_ijkl = c_{i+1} chi_{i+1,jkl} - (d/2) chi_ijkl - c_i chi_{i-1,jkl}
    X = np.zeros((M + 1,) * 4, dtype=dtype)
    for i in range(M + 1):
        X[i] = cc[i + 1] * Ch[i + 1, : M + 1, : M + 1, : M + 1] - dtype(d / 2) * Ch[i, : M + 1, : M + 1, : M + 1]
        if i > 0:
            X[i] -= cc[i] * Ch[i - 1, : M + 1, : M + 1, : M + 1]
    U = np.zeros((n,) * 4, dtype=dtype)
    # off-diagonal: (E_j - E_k) U_ijkl = (X_kijl - X_jikl) / 2
    for j in range(n):
        for k in range(n):
            if j != k:
                U[:, j, k, :] = (X[k, :n, j, :n] - X[j, :n, k, :n]) / (2 * (E[j] - E[k]))
    # ladder in the first index for U_i00l (i, l at the outer radius)
    L = n + 1
    D0 = np.zeros((L + 1, L + 1), dtype=dtype)
    D0[0, 0] = dtype(u0000(d))
    for s in range(1, 2 * L + 1):
        for i1 in range(min(s, L), -1, -1):
            l = s - i1
            if l > L or i1 < l:
                continue
            i = i1 - 1
            v = (dtype(d - 2) + E[i] - E[l]) * D0[i, l] + cc[i + 1] * Ch[i + 1, 0, 0, l] - E[i] * Ch[i, 0, 0, l]
            if l > 0:
                v += 2 * cc[l] * D0[i, l - 1]
            if i > 0:
                v += cc[i] * Ch[i - 1, 0, 0, l]
            D0[i1, l] = v / (2 * cc[i1])
            D0[l, i1] = D0[i1, l]
    # lift in the repeated index: U_{i,j+1,j+1,l} from U_ijjl
    diag = D0[:n, :n].copy()
    U[:, 0, 0, :] = diag
    for j in range(n - 1):
        t = X[j + 1, j, :n, :n] - X[j, j + 1, :n, :n]
        if j > 0:
            t = t + cc[j] / 4 * (X[j + 1, j - 1, :n, :n] - X[j - 1, j + 1, :n, :n])
        t = t + cc[j + 2] / 4 * (X[j, j + 2, :n, :n] - X[j + 2, j, :n, :n])
        diag = diag + t / (2 * cc[j + 1])
        U[:, j + 1, j + 1, :] = diag
    S = U + U.transpose(1, 0, 3, 2)
    idx = np.arange(n)
    jk = (idx[None, :, None, None] == idx[None, None, :, None])
    il = (idx[:, None, None, None] == idx[None, None, None, :])
    route = (jk.astype(np.int8) + il.astype(np.int8)) * np.ones((n,) * 4, dtype=np.int8)
    return CoeffTable(d, N_max, "snh", "Recursive", S.astype(np.float64), route)


def table(N_max: int, d: float, kind: str = "snh", provenance: str = "Recursive") -> CoeffTable:
    if provenance == "Recursive":
        return table_recursive(N_max, d, kind)
    return CoeffTable(d, N_max, kind, "Quadrature", table_quadrature(N_max, d, kind))


def symmetrize(t: CoeffTable) -> CoeffTable:
    """``C_njkl = (S_njkl + S_njlk) / 2``."""
    C = 0.5 * (t.S + t.S.transpose(0, 1, 3, 2))
    return CoeffTable(t.d, t.N_max, t.kind, t.provenance + "+sym", C)


def d_prime_residual(n: int, j: int, k: int, l: int, t: CoeffTable) -> float:
    """``(n+1) St_{n-1,jkl} + (j+1) St_{n,j-1,kl} - (k+1) St_{nj,k+1,l} - (l+1) St_{njk,l+1}``

    with ``St = sqrt((n+1)(j+1)(k+1)(l+1)) S``; terms with a negative index
    vanish.
    """
    if max(n, j, k + 1, l + 1) > t.N_max:
        raise IndexOutOfTable("residual needs indices one above the request")

    def st(a, b, c, e):
        if min(a, b, c, e) < 0:
            return 0.0
        return math.sqrt((a + 1) * (b + 1) * (c + 1) * (e + 1)) * t.S[a, b, c, e]

    return float((n + 1) * st(n - 1, j, k, l) + (j + 1) * st(n, j - 1, k, l)
                 - (k + 1) * st(n, j, k + 1, l) - (l + 1) * st(n, j, k, l + 1))


def d_prime_stratum(t: CoeffTable, n_max: int) -> tuple[float, float]:
    """(max |D'|, natural scale) over ``n + j = k + l + 1`` with indices <= n_max."""
    worst, scale = 0.0, 0.0
    for n, j, k in itertools.product(range(n_max + 1), repeat=3):
        l = n + j - k - 1
        if 0 <= l <= n_max:
            worst = max(worst, abs(d_prime_residual(n, j, k, l, t)))
            scale = max(scale, math.sqrt((n + 1) * (j + 1) * (k + 1) * (l + 1)) * abs(t.S[n, j, k, l]) * (n + 1))
    return worst, scale


# ---------------------------------------------------------------------------
# text format

def write_table(t: CoeffTable, path, header_extra: str = "") -> None:
    path = Path(path)
    n = t.N_max + 1
    with path.open("w", encoding="ascii") as fh:
        if header_extra:
            for line in header_extra.splitlines():
                fh.write(f"# {line}\n")
        fh.write(f"# {t.kind} {t.d:g} {t.N_max} {t.provenance}\n")
        for i, j, k, l in itertools.product(range(n), repeat=4):
            fh.write(f"{i} {j} {k} {l} {t.S[i, j, k, l]:.17e}\n")


def read_table(path) -> CoeffTable:
    path = Path(path)
    header = None
    rows = []
    with path.open(encoding="ascii") as fh:
        for line in fh:
            if line.startswith("#"):
                header = line[1:].split()
                continue
            if line.strip():
                rows.append(line.split())
    if header is None or len(header) != 4:
        raise ValueError("missing '# kind d N_max provenance' header")
    kind, d, N, prov = header[0], float(header[1]), int(header[2]), header[3]
    S = np.zeros((N + 1,) * 4)
    for r in rows:
        S[int(r[0]), int(r[1]), int(r[2]), int(r[3])] = float(r[4])
    return CoeffTable(d, N, kind, prov, S)
