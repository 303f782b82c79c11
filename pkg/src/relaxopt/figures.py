"""Figure rendering for CLI reports (Agg backend, PNG files next to the CSV)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_filtering_curve(sigmas, bounds, threshold, two_m, path):
    """Disturbance bound vs sigma with the 2m line and the threshold marker."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(sigmas, bounds, marker=".", label="Hessian disturbance bound")
    ax.axhline(two_m, color="gray", linestyle="--", label="2m")
    if threshold > 0:
        ax.axvline(threshold, color="firebrick", linestyle=":", label="sigma*")
    ax.set_xlabel("sigma")
    ax.set_ylabel("bound")
    ax.set_yscale("log")
    ax.legend()
    ax.set_title("Attenuation of the disturbance Hessian")
    _finish(fig, path)


def render_consistency(sigmas, gaps, cells, path):
    """Gap curve plus concentration mass per (delta, sigma) cell."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.loglog(sigmas, np.maximum(gaps, 1e-300), marker="o")
    ax1.set_xlabel("sigma")
    ax1.set_ylabel("|E(x*, sigma) - f(x*)|")
    ax1.set_title("Approximation gap")
    deltas = sorted({c[0] for c in cells})
    for d in deltas:
        xs = [c[1] for c in cells if c[0] == d]
        ys = [max(c[2], 1e-300) for c in cells if c[0] == d]
        ax2.loglog(xs, ys, marker="s", label=f"delta={d:g}")
    ax2.set_xlabel("sigma")
    ax2.set_ylabel("mass outside delta-ball")
    ax2.set_title("Concentration")
    ax2.legend()
    _finish(fig, path)


def render_threshold_study(scales, means, maxs, exacts, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(scales, means, marker="o", label="mean sigma*")
    ax.semilogx(scales, maxs, marker="^", label="max sigma*")
    if np.all(np.isfinite(exacts)):
        ax.semilogx(scales, exacts, linestyle="--", label="single-frequency exact")
    ax.set_xlabel("amplitude budget C")
    ax.set_ylabel("sigma*")
    ax.set_title("Convexity threshold vs disturbance budget")
    ax.legend()
    _finish(fig, path)


def render_trace(values, grad_norms, path):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(values, marker=".")
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("relaxed value")
    ax2.semilogy(np.maximum(grad_norms, 1e-300), marker=".")
    ax2.set_xlabel("iteration")
    ax2.set_ylabel("gradient norm")
    fig.suptitle("Descent trace")
    _finish(fig, path)


def render_flowfield(x, y, u, v, path, title):
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    ax.quiver(x, y, u, v, angles="xy", scale_units="xy")
    ax.set_xlabel("theta_1")
    ax.set_ylabel("theta_2")
    ax.set_aspect("equal")
    ax.set_title(title)
    _finish(fig, path)
