"""Report figures: spectrum comparison, wavefunction profiles, the
quantization-misfit discrimination curve, and norm-growth diagnostics.

All functions render to files (Agg backend); nothing opens a window.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .nu_core import quantization_misfit


def _save(fig, path: str, dpi: int) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)) or ".", exist_ok=True)
    fig.savefig(path, dpi=dpi, bbox_inches="tight")
    plt.close(fig)
    return path


def spectrum_figure(doc: dict, path: str, dpi: int = 150) -> str:
    """Ladder plot: engine vs published-formula vs pencil levels."""
    fig, ax = plt.subplots(figsize=(6, 4))
    series = {
        "engine": ("E_engine", "tab:blue", "o"),
        "published formula": ("E_paper_formula", "tab:orange", "s"),
        "pencil oracle": ("E_oracle", "tab:green", "x"),
    }
    for label, (key, color, marker) in series.items():
        ns, vals = [], []
        for rec in doc["levels"]:
            v = rec[key]
            if v is not None:
                ns.append(rec["n"])
                vals.append(v["re"])
        if ns:
            ax.plot(ns, vals, marker, color=color, label=label, ms=7, lw=0)
    ax.set_xlabel("level index n")
    ax.set_ylabel("Re E")
    ax.set_title(f"spectrum: {doc['config']['model']}")
    ax.grid(alpha=0.3)
    ax.legend()
    return _save(fig, path, dpi)


def wavefunction_figure(states, path: str, dpi: int = 150, span: float = 5.0) -> str:
    """|psi1| and |psi2| over the real line for each level."""
    xs = np.linspace(-span, span, 501)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharex=True)
    for state in states:
        p1 = np.array([abs(state.psi1(float(x))) for x in xs])
        p2 = np.array([abs(state.psi2(float(x))) for x in xs])
        axes[0].plot(xs, p1, label=f"n={state.n}")
        axes[1].plot(xs, p2, label=f"n={state.n}")
    axes[0].set_title(r"$|\psi_1(x)|$")
    axes[1].set_title(r"$|\psi_2(x)|$")
    for ax in axes:
        ax.set_xlabel("x")
        ax.grid(alpha=0.3)
        ax.legend()
    return _save(fig, path, dpi)


def discrimination_figure(family, states, path: str, dpi: int = 150) -> str:
    """Quantization misfit |lambda - lambda_n| against trial energy; dips to
    zero exactly at the engine levels (the residual-style adjudication of the
    spectrum, independent of any published expression)."""
    fig, ax = plt.subplots(figsize=(7, 4))
    if states:
        Emin = min(s.E.real for s in states) - 2.0
        Emax = max(s.E.real for s in states) + 2.0
    else:
        Emin, Emax = -5.0, 5.0
    Es = np.linspace(Emin, Emax, 601)
    for state in states:
        vals = []
        for E in Es:
            try:
                vals.append(quantization_misfit(family(complex(E)), state.n))
            except Exception:
                vals.append(np.nan)
        ax.semilogy(Es, np.maximum(vals, 1e-18), label=f"n={state.n}")
        ax.axvline(state.E.real, color="k", alpha=0.2, lw=1)
    ax.set_xlabel("trial energy E")
    ax.set_ylabel(r"quantization misfit $|\lambda - \lambda_n|$")
    ax.grid(alpha=0.3)
    ax.legend()
    return _save(fig, path, dpi)


def norm_growth_figure(states, norms_per_state, widths, path: str, dpi: int = 150) -> str:
    """Norm integral against half-width (log-log); flat means normalizable."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for state, norms in zip(states, norms_per_state):
        ax.loglog(widths, norms, "o-", label=f"n={state.n}")
    ax.set_xlabel("half-width L")
    ax.set_ylabel(r"$\int_{-L}^{L} (|\psi_1|^2 + |\psi_2|^2)\,dx$")
    ax.grid(alpha=0.3, which="both")
    ax.legend()
    return _save(fig, path, dpi)
