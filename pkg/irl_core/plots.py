"""
Success-rate curves: matplotlib SVG for experiment output, plotly figures
for the explorer.
"""

import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from irl_core.bounds import sample_threshold_beta  # noqa: E402
from irl_core.eval import interval_columns, summarize_rows  # noqa: E402
from irl_core.exceptions import BetaTooLarge  # noqa: E402
from irl_core.schemas import ExperimentConfig, ResultRow  # noqa: E402

logger = logging.getLogger(__name__)

THRESHOLD_COLOR = "#d62728"
UPPER_COLOR = "#1f77b4"


def threshold_for(rows: Sequence[ResultRow], cfg: Optional[ExperimentConfig] = None) -> Optional[float]:
    """
    Sample threshold line position.

    Uses the configured n and target beta when a config is given, otherwise
    the n and measured beta of the first row. None when beta is too large
    for the formula.
    """
    if cfg is not None:
        n, beta = cfg.n, cfg.target_beta
    elif rows:
        n, beta = rows[0].n, rows[0].beta
    else:
        return None
    try:
        return sample_threshold_beta(n, beta)
    except BetaTooLarge:
        logger.warning(f"No threshold line: beta={beta:.4g} too large for n={n}")
        return None


def emit_plot(rows: Sequence[ResultRow], cfg: Optional[ExperimentConfig],
              path: Union[str, Path], upper_line: Optional[float] = None) -> Optional[float]:
    """
    Success rate against log m, one series per solver, with the sample
    threshold as a vertical line. Returns the threshold x-position.
    """
    if not rows:
        raise ValueError("No result rows to plot")
    if upper_line is None and cfg is not None:
        upper_line = cfg.upper_line

    summary = summarize_rows(rows)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for solver, group in summary.groupby("solver", sort=False):
        ax.errorbar(group["m"], group["success_rate"], yerr=interval_columns(group),
                    marker="o", markersize=4, capsize=2, label=solver)

    threshold = threshold_for(rows, cfg)
    if threshold is not None:
        ax.axvline(threshold, color=THRESHOLD_COLOR, linestyle="--", label=f"lower bound m={threshold:.0f}")
    if upper_line is not None:
        ax.axvline(upper_line, color=UPPER_COLOR, linestyle=":", label=f"upper bound m={upper_line:.0f}")

    first = rows[0]
    ax.set_xscale("log")
    ax.set_ylim(-0.02, 1.02)
    ax.set_xlabel("number of samples m (log scale)")
    ax.set_ylabel("probability of success")
    ax.set_title(f"n={first.n}, k={first.k}, gamma={first.gamma:g}, beta={first.beta:.3g}")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="lower right", fontsize=8)

    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.info(f"Wrote plot to {path}")
    return threshold


def success_figure(rows: Sequence[ResultRow], threshold: Optional[float] = None,
                   upper_line: Optional[float] = None):
    """Plotly version of the success curve"""
    import plotly.graph_objects as go

    summary = summarize_rows(rows)
    fig = go.Figure()
    for solver, group in summary.groupby("solver", sort=False):
        fig.add_trace(go.Scatter(
            x=group["m"],
            y=group["success_rate"],
            mode="lines+markers",
            name=solver,
            error_y=dict(
                type="data",
                symmetric=False,
                array=group["ci_high"] - group["success_rate"],
                arrayminus=group["success_rate"] - group["ci_low"],
            ),
        ))

    # vertical lines as traces; shape coordinates on a log axis are log10 units
    for x, name, dash, color in [(threshold, "lower bound", "dash", THRESHOLD_COLOR),
                                 (upper_line, "upper bound", "dot", UPPER_COLOR)]:
        if x is not None:
            fig.add_trace(go.Scatter(x=[x, x], y=[0.0, 1.0], mode="lines", name=name,
                                     line=dict(dash=dash, color=color)))

    fig.update_layout(
        xaxis_title="number of samples m",
        yaxis_title="probability of success",
        yaxis_range=[-0.02, 1.02],
        height=450,
    )
    fig.update_xaxes(type="log")
    return fig
