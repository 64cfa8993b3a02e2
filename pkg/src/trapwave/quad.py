"""Composite Gauss-Legendre rules and the split max-kernel integral.

The Newton kernel for radial functions,

    K[f](r) = int_0^inf f(s) s^(d-1) / max(r, s)^(d-2) ds
            = r^(2-d) int_0^r f s^(d-1) ds + int_r^inf f s ds,

is evaluated at every outer node by summing whole panels plus a partial
panel integrated with its own Gauss-Legendre rule.  Everything is smooth on
each piece, so the result converges spectrally in the panel order.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def _gl(order: int):
    return np.polynomial.legendre.leggauss(order)


def gl_nodes(edges, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite rule on consecutive ``edges``."""
    edges = np.asarray(edges, dtype=float)
    t, w = _gl(order)
    a = edges[:-1, None]
    h = np.diff(edges)[:, None]
    x = (a + h * (t + 1) / 2).ravel()
    wx = (h / 2 * w).ravel()
    return x, wx


class SplitKernel:
    """Outer nodes plus the partial-panel rules needed for cumulative integrals.

    ``funcs`` callables passed to :meth:`cumulative` must accept an array
    of radii and return values of the same shape.
    """

    def __init__(self, edges, order: int = 16):
        self.edges = np.asarray(edges, dtype=float)
        self.order = order
        self.x, self.w = gl_nodes(self.edges, order)
        t, w = _gl(order)
        npan = len(self.edges) - 1
        self.pidx = np.repeat(np.arange(npan), order)
        pa = self.edges[:-1][self.pidx]
        self.xi = pa[:, None] + (self.x - pa)[:, None] * (t + 1) / 2
        self.wi = (self.x - pa)[:, None] / 2 * w

    def cumulative(self, vals_outer: np.ndarray, vals_inner: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return (int_0^x g, int_x^inf g) at each outer node.

        ``vals_outer`` holds g at ``self.x``; ``vals_inner`` holds g at
        ``self.xi`` (same leading shape convention: trailing axes are the
        node axes).
        """
        n = self.order
        npan = len(self.edges) - 1
        full = (vals_outer * self.w).reshape(*vals_outer.shape[:-1], npan, n).sum(-1)
        cum = np.cumsum(full, axis=-1)
        before = np.concatenate([np.zeros(full.shape[:-1] + (1,)), cum[..., :-1]], axis=-1)
        part = (vals_inner * self.wi).sum(-1)
        A = before[..., self.pidx] + part
        B = cum[..., -1:] - A
        return A, B

    def newton(self, f, d: float) -> np.ndarray:
        """``K[f]`` at the outer nodes for a callable radial density ``f``."""
        go = f(self.x)
        gi = f(self.xi)
        A, _ = self.cumulative(go * self.x ** (d - 1), gi * self.xi ** (d - 1))
        _, B = self.cumulative(go * self.x, gi * self.xi)
        return self.x ** (2 - d) * A + B
