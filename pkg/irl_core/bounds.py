"""
Closed-form sample-complexity bounds: code size, facet count, ensemble size,
centroid dot, KL bounds, Fano error bound and sample thresholds.
All logarithms are natural.
"""

import logging
import math
from typing import Dict, List, Optional, Tuple

from irl_core.ensemble import eps_bounds, theta_from_beta_eps
from irl_core.exceptions import (
    BetaTooLarge,
    DegenerateDenominator,
    EpsTooLarge,
    VacuousBound,
)
from irl_core.geometry import SphericalCode, centroid_dot, facets_of_code, min_angle
from irl_core.schemas import BoundReport

logger = logging.getLogger(__name__)

LOG2 = math.log(2.0)


def code_size_lower_bound(n: int, theta: float) -> float:
    """N >= sqrt(2 pi (n-1)) cos(theta) / sin(theta)^(n-2), (1+o(1)) taken as 1"""
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    return _code_size(n, cos_t, sin_t)


def _code_size(n: int, cos_t: float, sin_t: float) -> float:
    if abs(cos_t) < 1e-15:
        return 0.0
    if sin_t == 0.0:
        return math.copysign(math.inf, cos_t)
    return math.sqrt(2 * math.pi * (n - 1)) * cos_t / sin_t ** (n - 2)


def facet_count_lower_bound(n: int, N: float) -> float:
    """Facets of a simplicial polytope with N vertices: (n-2)N - (n-1)(n-3)"""
    return (n - 2) * N - (n - 1) * (n - 3)


def theta_trig(n: int, eps: float, beta: float) -> Tuple[float, float]:
    """(sin theta, cos theta) of the separation angle in closed form"""
    theta_from_beta_eps(n, beta, eps)
    denominator = eps ** 2 + n * (n - 2) ** 2 * beta ** 2
    cos_t = (eps ** 2 - n * (n - 2) * beta ** 2) / denominator
    sin_t = beta * math.sqrt(
        n * (n - 1) * (n - 2) * (2 * eps ** 2 + n * (n - 2) * (n - 3) * beta ** 2)
    ) / denominator
    return sin_t, cos_t


def ensemble_size_lower_bound(n: int, eps: float, beta: float) -> float:
    """Minimum number of instance/reward pairs the construction yields"""
    sin_t, cos_t = theta_trig(n, eps, beta)
    return facet_count_lower_bound(n, _code_size(n, cos_t, sin_t))


def centroid_dot_lower_bound(n: int, theta: float) -> float:
    """2 sin(theta/2) / sqrt(2(n-2)(1 + (n-2)cos theta))"""
    inner = 1 + (n - 2) * math.cos(theta)
    if n < 3 or inner <= 0:
        raise DegenerateDenominator(f"1 + (n-2)cos(theta) = {inner:.4g} is not positive")
    return 2 * math.sin(theta / 2) / math.sqrt(2 * (n - 2) * inner)


def centroid_dot_check(code: SphericalCode) -> Dict[str, float]:
    """Measured min p_hat . y_hat over facets against the formula bound"""
    n = code.dim + 1
    measured = min(centroid_dot(code, facet) for facet in facets_of_code(code))
    bound = centroid_dot_lower_bound(n, min_angle(code))
    return {"measured": measured, "bound": bound, "slack": measured - bound}


def kl_column_bound(n: int, eps: float) -> float:
    """Per-row KL bound 2 eps^2 n / (1 - n eps)"""
    if n * eps >= 1.0:
        raise EpsTooLarge(f"n*eps = {n * eps:.4g} must be below 1")
    return 2 * eps ** 2 * n / (1 - n * eps)


def kl_trajectory_bound(n: int, eps: float, m: int) -> float:
    """(m-1) times the per-row bound"""
    if m < 1:
        raise ValueError("m must be at least 1")
    return (m - 1) * kl_column_bound(n, eps)


def fano_expression(n: int, eps: float, beta: float, m: int,
                    ensemble_size_override: Optional[float] = None) -> float:
    """1 - (KL_traj + log 2) / log eta, without clamping"""
    if ensemble_size_override is not None:
        eta = ensemble_size_override
    else:
        eta = ensemble_size_lower_bound(n, eps, beta)
    if not eta > 1.0:
        raise VacuousBound(eta)
    return 1.0 - (kl_trajectory_bound(n, eps, m) + LOG2) / math.log(eta)


def fano_error_lower_bound(n: int, eps: float, beta: float, m: int,
                           ensemble_size_override: Optional[float] = None) -> float:
    """Lower bound on the probability of misidentifying the ensemble member"""
    value = fano_expression(n, eps, beta, m, ensemble_size_override)
    return min(1.0, max(0.0, value))


def sample_threshold_simplex_eq(n: int) -> float:
    """Sample count below which the simplex ensemble errs with probability >= 1/2"""
    return (n - 1) * (0.5 * math.log(n) - LOG2) * (1 - math.sqrt(n / (2 * (n - 1)))) + 1


def sample_threshold_beta(n: int, beta: float) -> float:
    """Same threshold in terms of beta with eps = sqrt(n-2) beta"""
    shrink = n * math.sqrt(n - 2) * beta
    if shrink >= 1.0:
        raise BetaTooLarge(f"n sqrt(n-2) beta = {shrink:.4g} must be below 1")
    return (0.5 * math.log(n) - LOG2) / (2 * (n - 2) * n * beta ** 2) * (1 - shrink) + 1


def default_eps(n: int, beta: float) -> float:
    lower, upper = eps_bounds(n, beta)
    return max(lower, min(1.0 / math.sqrt(2 * n * (n - 1)), upper))


def bound_report(n: int, beta: float, eps: Optional[float] = None, m: int = 1,
                 ensemble_size: Optional[float] = None) -> BoundReport:
    """Evaluate every bound at one parameter point, flagging vacuous ones"""
    if eps is None:
        eps = default_eps(n, beta)
    theta = theta_from_beta_eps(n, beta, eps)
    N_lower = code_size_lower_bound(n, theta)
    ensemble_lower = ensemble_size_lower_bound(n, eps, beta)
    eta = ensemble_size if ensemble_size is not None else ensemble_lower
    vacuous: Dict[str, bool] = {
        "N_lower": N_lower <= 0,
        "facets_lower": facet_count_lower_bound(n, N_lower) <= 1,
        "fano": eta <= 1,
    }

    try:
        kl_col = kl_column_bound(n, eps)
        kl_traj = kl_trajectory_bound(n, eps, m)
        vacuous["kl"] = False
    except EpsTooLarge:
        kl_col = kl_traj = math.inf
        vacuous["kl"] = True

    fano_lb = fano_raw = None
    if not vacuous["fano"] and not vacuous["kl"]:
        fano_raw = fano_expression(n, eps, beta, m, eta)
        fano_lb = min(1.0, max(0.0, fano_raw))

    try:
        centroid_lb = centroid_dot_lower_bound(n, theta)
    except DegenerateDenominator:
        centroid_lb = None

    try:
        beta_threshold = sample_threshold_beta(n, beta)
    except BetaTooLarge:
        beta_threshold = None

    flagged = [name for name, flag in vacuous.items() if flag]
    if flagged:
        logger.info(f"Vacuous bounds at n={n}, beta={beta:.4g}: {', '.join(flagged)}")

    return BoundReport(
        n=n, eps=eps, beta=beta, theta=theta, m=m,
        N_lower=N_lower,
        facets_lower=facet_count_lower_bound(n, N_lower),
        ensemble_lower=ensemble_lower,
        eta=eta,
        kl_col=kl_col,
        kl_traj=kl_traj,
        fano_error_lb=fano_lb,
        fano_unclamped=fano_raw,
        centroid_dot_lb=centroid_lb,
        m_threshold_simplex=sample_threshold_simplex_eq(n),
        m_threshold_beta=beta_threshold,
        vacuous=vacuous,
    )


def format_bound_report(report: BoundReport) -> str:
    """Aligned name/value table"""
    labels = [
        ("n", report.n), ("eps", report.eps), ("beta", report.beta),
        ("theta", report.theta), ("m", report.m),
        ("N_lower (asymptotic)", report.N_lower),
        ("facets_lower", report.facets_lower),
        ("ensemble_lower", report.ensemble_lower),
        ("eta", report.eta),
        ("kl_col", report.kl_col), ("kl_traj", report.kl_traj),
        ("fano_error_lb", report.fano_error_lb),
        ("fano_unclamped", report.fano_unclamped),
        ("centroid_dot_lb", report.centroid_dot_lb),
        ("m_threshold_simplex", report.m_threshold_simplex),
        ("m_threshold_beta", report.m_threshold_beta),
    ]
    width = max(len(name) for name, _ in labels)
    lines: List[str] = []
    for name, value in labels:
        if value is None:
            text = "n/a"
        elif isinstance(value, int):
            text = str(value)
        else:
            text = f"{value:.6g}"
        lines.append(f"{name.ljust(width)}  {text}")
    flagged = [name for name, flag in report.vacuous.items() if flag]
    lines.append(f"{'vacuous'.ljust(width)}  {', '.join(flagged) if flagged else 'none'}")
    return "\n".join(lines)
