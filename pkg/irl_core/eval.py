"""
Evaluation of experiment results.
Includes binomial confidence intervals, per-solver summaries, the success
trend over the sample grid and the Fano consistency check.
"""

import logging
import math
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
from statsmodels.stats.proportion import proportion_confint

from irl_core.schemas import ResultRow

logger = logging.getLogger(__name__)


def success_interval(successes: int, trials: int, alpha: float = 0.05) -> Tuple[float, float]:
    """Wilson score interval for a success proportion"""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes={successes} outside [0, {trials}]")

    low, high = proportion_confint(successes, trials, alpha=alpha, method="wilson")
    return float(low), float(high)


def summarize_rows(rows: Sequence[ResultRow], alpha: float = 0.05) -> pd.DataFrame:
    """Result rows as a frame with Wilson bounds, sorted by solver then m"""
    if not rows:
        return pd.DataFrame(columns=["solver", "m", "trials", "successes",
                                     "success_rate", "ci_low", "ci_high"])
    records = []
    for row in rows:
        low, high = success_interval(row.successes, row.trials, alpha)
        records.append({
            "solver": row.solver,
            "m": row.m,
            "trials": row.trials,
            "successes": row.successes,
            "success_rate": row.success_rate,
            "ci_low": low,
            "ci_high": high,
        })
    return pd.DataFrame(records).sort_values(["solver", "m"], kind="stable").reset_index(drop=True)


def quartile_trend(rows: Sequence[ResultRow]) -> Dict[str, Tuple[float, float]]:
    """
    Per solver: (mean success over the bottom quartile of m, mean over the top quartile).

    Quartiles cover ceil(len(grid) / 4) grid points each.
    """
    df = pd.DataFrame([row.model_dump() for row in rows])
    trend = {}
    for solver, group in df.groupby("solver", sort=True):
        ordered = group.sort_values("m")
        size = max(1, math.ceil(len(ordered) / 4))
        bottom = float(ordered["success_rate"].iloc[:size].mean())
        top = float(ordered["success_rate"].iloc[-size:].mean())
        trend[solver] = (bottom, top)
        if top < bottom:
            logger.warning(f"{solver}: success falls from {bottom:.3f} to {top:.3f} across the grid")
    return trend


def binomial_sigma(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / trials)


def fano_consistency(errors: int, trials: int, bound: float, bands: float = 3.0) -> bool:
    """
    True when the observed error rate is not below the Fano bound beyond
    `bands` binomial standard deviations (taken at the bound).
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rate = errors / trials
    return rate >= bound - bands * binomial_sigma(bound, trials)


def success_below_threshold(rows: Sequence[ResultRow], threshold: float) -> List[ResultRow]:
    """Rows at or below a sample threshold"""
    return [row for row in rows if row.m <= threshold]


def interval_columns(df: pd.DataFrame) -> np.ndarray:
    """2 x len(df) asymmetric error-bar array from ci_low/ci_high"""
    return np.vstack([df["success_rate"] - df["ci_low"], df["ci_high"] - df["success_rate"]])
