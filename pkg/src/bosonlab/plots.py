"""Figure rendering for CLI reports.

Every function writes a single PNG next to the structured output; callers
pick the directory.  Figures are diagnostic companions to the numbers in
the reports, not primary outputs.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_spectrum_plot(report, path):
    """Eigenvalues by index with the zero-detection band."""
    evals = np.asarray(report.eigenvalues)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    idx = np.arange(len(evals))
    zero = np.abs(evals) <= report.zero_tolerance
    ax.plot(idx[~zero], evals[~zero], "o", ms=4, color="tab:blue", label="eigenvalues")
    if np.any(zero):
        ax.plot(idx[zero], evals[zero], "o", ms=6, color="tab:red",
                label=f"zero space (dim {report.zero_space_dimension})")
    ax.axhspan(-report.zero_tolerance, report.zero_tolerance, color="tab:red", alpha=0.15)
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("eigenvalue index")
    ax.set_ylabel("eigenvalue")
    ax.set_title(f"spectral operator at energy {report.energy:g}")
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_ensemble_plot(ensemble, path, mode: int = 0):
    """Phase-space scatter of one mode of a weighted ensemble."""
    pts = np.array([s.amplitudes[mode] for _, s in ensemble.members])
    weights = np.array([w for w, _ in ensemble.members])
    fig, ax = plt.subplots(figsize=(5, 5))
    sc = ax.scatter(pts.real, pts.imag, c=weights, cmap="viridis", s=25)
    fig.colorbar(sc, ax=ax, label="weight")
    ax.set_xlabel(f"Re(al{mode})")
    ax.set_ylabel(f"Im(al{mode})")
    ax.set_aspect("equal")
    ax.set_title("ensemble members")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_trace_check_plot(report, path):
    """Classical vs quantum side of a trace comparison."""
    fig, ax = plt.subplots(figsize=(5, 4))
    values = [report.classical_expectation.real, report.quantum_trace.real]
    ax.bar(["classical", "quantum"], values, color=["tab:green", "tab:blue"])
    ax.set_ylabel("expectation value")
    ax.set_title(f"residual = {report.residual:.3e}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_boltzmann_plot(ensemble, energies, oracle_mean, path):
    """Sampled energy histogram with the oracle mean when available."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    axes[0].hist(energies, bins=60, density=True, color="tab:blue", alpha=0.8)
    axes[0].axvline(float(np.mean(energies)), color="tab:red", label="sample mean")
    if oracle_mean is not None:
        axes[0].axvline(oracle_mean, color="k", ls="--", label="oracle mean")
    axes[0].set_xlabel("energy")
    axes[0].set_ylabel("density")
    axes[0].legend(fontsize=8)
    axes[1].plot(ensemble.phi[:, 0], ensemble.pi[:, 0], ".", ms=1.5, alpha=0.4)
    axes[1].set_xlabel("phi0")
    axes[1].set_ylabel("pi0")
    axes[1].set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_invariance_plot(report, path):
    """Moment drifts with three-standard-error bars."""
    names = [m.name for m in report.moments]
    drifts = [m.drift for m in report.moments]
    errs = [3.0 * m.standard_error for m in report.moments]
    colors = ["tab:red" if m.significant else "tab:blue" for m in report.moments]
    fig, ax = plt.subplots(figsize=(max(5, 1 + 1.2 * len(names)), 4))
    xs = np.arange(len(names))
    ax.bar(xs, drifts, yerr=errs, color=colors, capsize=4)
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xticks(xs)
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylabel("drift (error bars: 3 SE)")
    ax.set_title(f"moment drift over horizon {report.horizon:g}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_lattice_plot(frequencies, residuals, path):
    """Mode frequencies and per-configuration trace residuals."""
    freqs = np.asarray(frequencies).ravel()
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    axes[0].stem(np.arange(len(freqs)), freqs)
    axes[0].set_xlabel("mode index")
    axes[0].set_ylabel("frequency")
    axes[0].set_title("lattice dispersion")
    axes[1].semilogy(np.maximum(np.asarray(residuals, dtype=float), 1e-18), "o")
    axes[1].set_xlabel("configuration")
    axes[1].set_ylabel("|trace residual|")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_dual_plot(orders, errors, bound, path):
    """Series truncation error versus expansion order."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(orders, np.maximum(np.asarray(errors, dtype=float), 1e-18), "o-",
                label="|trace - exp|")
    if bound is not None and bound > 0 and math.isfinite(bound):
        ax.axhline(bound, color="k", ls="--", label="remainder bound")
    ax.set_xlabel("expansion order")
    ax.set_ylabel("error")
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
