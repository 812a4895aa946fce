"""Optional matplotlib rendering for run and sweep reports.

Figures are written next to the delimited output when the CLI is invoked with
--plot; the data files themselves stay plot-free and bit-stable.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def plot_run(records, epsilon: float, path) -> None:
    """Histogram of trial estimates against the exact fidelity band."""
    estimates = [r.estimate for r in records]
    exact = records[0].exact if records else 0.0
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    ax.hist(estimates, bins=min(40, max(10, len(estimates) // 5)), color="#4878cf", alpha=0.85)
    ax.axvline(exact, color="k", lw=1.2, label=f"exact = {exact:.4f}")
    ax.axvspan(exact - epsilon, exact + epsilon, color="k", alpha=0.08, label="epsilon band")
    ax.set_xlabel("fidelity estimate")
    ax.set_ylabel("trials")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep(rows, axis: str, path) -> None:
    """Coverage/error and measured-vs-bound sample counts along the sweep axis."""
    x = [r.axis_value for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.8))
    ax1.plot(x, [r.mean_abs_error for r in rows], "o-", color="#4878cf", label="mean |error|")
    ax1.set_xlabel(axis)
    ax1.set_ylabel("mean abs error", color="#4878cf")
    twin = ax1.twinx()
    twin.plot(x, [r.coverage_fraction for r in rows], "s--", color="#d65f5f", label="coverage")
    twin.set_ylabel("coverage fraction", color="#d65f5f")
    twin.set_ylim(0.0, 1.05)
    ax2.plot(x, [r.mean_total_samples for r in rows], "o-", color="#4878cf", label="measured")
    ax2.plot(x, [r.bound_total_samples for r in rows], "s--", color="#6acc65", label="E[N] bound")
    ax2.set_xlabel(axis)
    ax2.set_ylabel("total samples")
    ax2.set_yscale("log")
    ax2.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
