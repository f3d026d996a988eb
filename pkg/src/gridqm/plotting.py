"""Figure rendering for the CLI report paths.

All figures are written headlessly through the Agg backend with a fixed
style, fixed dpi and no timestamp metadata, so reruns produce identical
bytes alongside the delimited outputs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLE = {
    "figure.figsize": (7.0, 4.2),
    "figure.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
    "savefig.bbox": "tight",
}

_SAVE_KW = {"metadata": {"Software": None}}


def _save(fig, path):
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_phase_space_figure(path, ks, chi_vals, chi_ref, wig_vals, wig_ref) -> None:
    """Side-by-side chi and Wigner sweeps with their closed-form references."""
    with plt.rc_context(_STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2)
        ax1.plot(ks, np.real(chi_vals), label="computed")
        ax1.plot(ks, np.real(chi_ref), "--", label="closed form")
        ax1.set_xlabel("wavevector k")
        ax1.set_ylabel("Re chi(k, 0)")
        ax1.legend()
        ax2.plot(ks, np.real(wig_vals), label="computed")
        ax2.plot(ks, np.real(wig_ref), "--", label="closed form")
        ax2.set_xlabel("wavevector k")
        ax2.set_ylabel("rho(0, k)")
        ax2.legend()
        _save(fig, path)


def save_residual_figure(path, residuals, tol, title) -> None:
    residuals = np.asarray(residuals, dtype=float)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.semilogy(np.arange(residuals.size), np.maximum(residuals, 1e-18), ".")
        ax.axhline(tol, color="tab:red", ls="--", label=f"tolerance {tol:g}")
        ax.set_xlabel("case index")
        ax.set_ylabel("residual")
        ax.set_title(title)
        ax.legend()
        _save(fig, path)


def save_spectrum_figure(path, modes, k_eigs, omega_eigs) -> None:
    with plt.rc_context(_STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2)
        ax1.plot(modes, k_eigs, ".")
        ax1.set_xlabel("mode n")
        ax1.set_ylabel("K eigenvalue")
        ax2.plot(modes, omega_eigs, ".")
        ax2.set_xlabel("mode n")
        ax2.set_ylabel("Omega eigenvalue")
        _save(fig, path)


def save_singular_values_figure(path, svals) -> None:
    svals = np.asarray(svals, dtype=float)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.semilogy(np.arange(1, svals.size + 1), np.maximum(svals, 1e-20), ".")
        ax.set_xlabel("index")
        ax.set_ylabel("singular value")
        ax.set_title("smeared projection spectrum (rank one)")
        _save(fig, path)


def save_invariant_chart(path, names, measured, tols) -> None:
    measured = np.maximum(np.asarray(measured, dtype=float), 1e-18)
    tols = np.asarray(tols, dtype=float)
    idx = np.arange(len(names))
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(7.0, 0.3 * len(names) + 1.5))
        ax.barh(idx, np.log10(measured / tols))
        ax.axvline(0.0, color="tab:red", ls="--")
        ax.set_yticks(idx)
        ax.set_yticklabels(names, fontsize=7)
        ax.set_xlabel("log10(measured / tolerance)   (negative = pass)")
        _save(fig, path)


def save_spin_phase_figure(path, deltas, measured_re, measured_im, ref_re, ref_im) -> None:
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.plot(deltas, measured_re, ".", label="Re measured")
        ax.plot(deltas, ref_re, "-", alpha=0.6, label="Re e^{i(a-b)/2}")
        ax.plot(deltas, measured_im, "x", label="Im measured")
        ax.plot(deltas, ref_im, "--", alpha=0.6, label="Im e^{i(a-b)/2}")
        ax.set_xlabel("alpha - beta")
        ax.set_ylabel("component-0 correlation phase")
        ax.legend()
        _save(fig, path)
