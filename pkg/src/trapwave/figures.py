"""Optional PNG companions to the CSV outputs (enabled by ``--figures``)."""
from __future__ import annotations

from pathlib import Path

import numpy as np


def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def profile(path, r, u, h=None, title: str = "") -> Path:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(r, u, label="u")
    if h is not None and len(h):
        ax.plot(r, h, "--", label="h")
    ax.set_xlabel("r")
    ax.legend()
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def branch(path, b, omega, mass, omega_inf=None) -> Path:
    plt = _plt()
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(10, 4))
    a1.semilogx(b, omega, ".-")
    if omega_inf is not None:
        a1.axhline(omega_inf, color="k", lw=0.8, ls=":")
    a1.set_xlabel("b")
    a1.set_ylabel("omega")
    a2.plot(omega, mass, ".-")
    a2.set_xlabel("omega")
    a2.set_ylabel("M")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def spectrum(path, lams) -> Path:
    plt = _plt()
    lams = np.asarray(lams)
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(lams.real, lams.imag, "x")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def modes(path, t, alphas, n_show: int = 6) -> Path:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4))
    for n in range(min(n_show, alphas.shape[1])):
        ax.plot(t, np.abs(alphas[:, n]), label=f"|a_{n}|")
    ax.set_xlabel("t")
    ax.legend(ncol=3, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
