"""Figure rendering for harness reports.

Every report kind gets a small PNG summary written next to the tabular
output; rendering is headless and deterministic.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .report import RatioReport


def _render_ratio(report: RatioReport, path: str) -> None:
    rows = [r for r in report.rows if not r.skipped]
    labels = [f"{r.function} | {r.weight}" for r in rows]
    ratios = [r.ratio for r in rows]
    colors = ["tab:blue" if r.in_class else "tab:orange" for r in rows]
    fig, ax = plt.subplots(figsize=(8, max(2.5, 0.35 * len(rows) + 1)))
    ax.barh(range(len(rows)), ratios, color=colors)
    ax.set_yticks(range(len(rows)), labels, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("ratio")
    title = f"{report.experiment}: {report.kind} ratio"
    if report.suite_max is not None:
        ax.axvline(report.suite_max, color="k", ls="--", lw=0.8)
        title += f" (suite max {report.suite_max:.4g})"
    ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _render_pointwise(report: dict, path: str) -> None:
    rows = report["rows"]
    labels = [r["function"] for r in rows]
    fig, ax = plt.subplots(figsize=(8, max(2.5, 0.4 * len(rows) + 1)))
    y = range(len(rows))
    ax.barh([i - 0.2 for i in y], [r["conversion_constant"] for r in rows],
            height=0.4, label="conversion")
    ax.barh([i + 0.2 for i in y],
            [r["square_function_constant"] for r in rows],
            height=0.4, label="square function")
    ax.set_yticks(list(y), labels, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("empirical constant")
    ax.set_title(f"{report['experiment']}: pointwise constants", fontsize=9)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _render_boundary(report: dict, path: str) -> None:
    rows = report["rows"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    for r in rows:
        ax1.semilogy(range(len(r["characteristic_per_depth"])),
                     r["characteristic_per_depth"], marker="o",
                     label=f"alpha={r['alpha']}")
    ax1.set_xlabel("refinement depth")
    ax1.set_ylabel("characteristic")
    ax1.legend(fontsize=7)
    alphas = [r["alpha"] for r in rows]
    ax2.plot(alphas, [r["jump_ratio"] for r in rows], marker="s")
    ax2.set_xlabel("alpha")
    ax2.set_ylabel("jump ratio")
    fig.suptitle(f"{report['experiment']}: weight boundary "
                 f"(index {rows[0]['index']:.3g})", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report(report, out_base: str) -> list:
    """Render the figure(s) for a report; returns written paths."""
    path = f"{out_base}.png"
    if isinstance(report, RatioReport):
        _render_ratio(report, path)
        return [path]
    kind = report.get("kind")
    if kind == "pointwise":
        _render_pointwise(report, path)
        return [path]
    if kind == "weight-boundary":
        _render_boundary(report, path)
        return [path]
    return []
