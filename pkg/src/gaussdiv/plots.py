"""Figure rendering for experiment reports.

Each CLI command saves one PNG next to its CSV.  Rendering is best-effort
presentation; the CSV stays the record of note.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .report import ExperimentReport


def _new_axes(title: str):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_sieve(report: ExperimentReport, path) -> None:
    fig, ax = _new_axes("Divisor summatory residual")
    n = report.column("n")
    resid = np.abs(report.column("residual"))
    ax.loglog(n, resid, "o-", label="|D(N) - main term|")
    ax.loglog(n, n**0.75, "--", label=r"$N^{3/4}$")
    ax.set_xlabel("N")
    ax.set_ylabel("residual")
    ax.legend()
    _save(fig, path)


def plot_kappa(report: ExperimentReport, path) -> None:
    fig, ax = _new_axes("Sierpinski constant estimate")
    ax.semilogx(report.column("n"), report.column("kappa_hat"), "o-")
    ax.set_xlabel("N")
    ax.set_ylabel(r"$\hat\kappa$")
    _save(fig, path)


def plot_scan(report: ExperimentReport, path) -> None:
    fig, ax = _new_axes(f"Multiplier scan: {report.meta.get('kind', '')}")
    mag = np.hypot(report.column("re"), report.column("im"))
    shape = report.column("bound_shape")
    ax.semilogy(np.arange(len(mag)), mag, ".", label="|value|")
    ax.semilogy(np.arange(len(shape)), shape, ".", alpha=0.5, label="bound shape")
    ax.set_xlabel("grid point")
    ax.legend()
    _save(fig, path)


def plot_major_error(report: ExperimentReport, path) -> None:
    fig, ax = _new_axes("Rotation-averaged rational-frequency error")
    nq = report.column("q_norm")
    ax.semilogx(np.maximum(nq, 1), report.column("normalized_error"), "o")
    ax.set_xlabel("N(q)")
    ax.set_ylabel("error / shape")
    _save(fig, path)


def plot_ramanujan(report: ExperimentReport, path) -> None:
    fig, ax = _new_axes("Ramanujan-sum moment growth")
    q = report.column("q_cap")
    m = report.column("moment")
    ax.loglog(q, m, "o-", label="moment")
    ax.loglog(q, m[0] * (q / q[0]) ** 0.3, "--", label=r"$Q^{0.3}$ reference")
    ax.set_xlabel("Q")
    ax.legend()
    _save(fig, path)


def plot_improving(report: ExperimentReport, path) -> None:
    fig, ax = _new_axes("Improving ratios by density")
    dens = report.column("density")
    phi1 = report.column("phi1")
    phi2 = report.column("phi2")
    for uq in sorted(set(dens)):
        sel = dens == uq
        ax.scatter(np.full(sel.sum(), uq), phi1[sel], s=8, color="tab:blue")
        ax.scatter(np.full(sel.sum(), uq), phi2[sel], s=8, color="tab:orange")
    ax.set_xscale("log")
    ax.set_xlabel("density")
    ax.set_ylabel("ratio (blue: p'-form, orange: pairing)")
    _save(fig, path)


def plot_sharpness(report: ExperimentReport, path) -> None:
    fig, ax = _new_axes("Endpoint ratio r(N) / log N")
    ax.semilogx(report.column("n"), report.column("r_over_logn"), "o-")
    ax.set_xlabel("N")
    ax.set_ylabel("r(N)/log N")
    _save(fig, path)


def plot_weighted(report: ExperimentReport, path) -> None:
    fig, ax = _new_axes("Weighted maximal operator ratios")
    box = report.column("box")
    ratio = report.column("ratio")
    ax.scatter(box, ratio, s=10)
    ax.set_xlabel("box size")
    ax.set_ylabel("||A* f|| / ||f||")
    _save(fig, path)


def plot_sparse(report: ExperimentReport, path) -> None:
    fig, ax = _new_axes("Sparse domination ratios")
    ax.hist(report.column("ratio"), bins=20)
    ax.set_xlabel("|(A* f, g)| / sparse form")
    _save(fig, path)


def plot_oscillation(report: ExperimentReport, path) -> None:
    fig, ax = _new_axes("Oscillation partial sums")
    trials = report.column("trial")
    for t in sorted(set(trials)):
        sel = trials == t
        ax.plot(report.column("k")[sel], report.column("partial_sum")[sel], alpha=0.5)
    ax.set_xlabel("block k")
    ax.set_ylabel("partial sum / ||f||^2")
    _save(fig, path)


RENDERERS = {
    "sieve": plot_sieve,
    "kappa": plot_kappa,
    "expsum_scan": plot_scan,
    "major_error": plot_major_error,
    "ramanujan": plot_ramanujan,
    "improving": plot_improving,
    "sharpness": plot_sharpness,
    "weighted_maximal": plot_weighted,
    "sparse": plot_sparse,
    "oscillation": plot_oscillation,
    "square_function": plot_oscillation,
}


def render(report: ExperimentReport, path) -> None:
    RENDERERS.get(report.name, plot_scan)(report, path)
