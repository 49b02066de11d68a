"""
Hard IRL ensembles: one instance/reward pair per facet of a spherical code.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from irl_core import MARGIN_TOL, STRICT_TOL
from irl_core.exceptions import (
    BetaTooLarge,
    DimensionMismatch,
    InfeasibleSeparation,
    InvalidRow,
)
from irl_core.geometry import (
    Facet,
    SphericalCode,
    facet_normals,
    facets_of_code,
    make_code,
    min_angle,
    rotation_to_hyperplane,
)
from irl_core.mdp import IrlInstance, separability_margin, validate_stochastic
from irl_core.schemas import EnsembleConfig, EnsembleReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class HardInstance:
    """Instance built from one facet together with its reward"""
    instance: IrlInstance
    reward: np.ndarray
    facet_index: int
    facet: Tuple[int, ...]
    config: EnsembleConfig
    margin: float

    @property
    def meets_beta(self) -> bool:
        return self.margin >= self.config.beta - MARGIN_TOL


def _check_n_beta(n: int, beta: float):
    if n < 3:
        raise ValueError(f"n must be at least 3, got {n}")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")


def theta_from_beta_eps(n: int, beta: float, eps: float) -> float:
    """Angle satisfying sin^2(theta/2) = n(n-1)(n-2)beta^2 / (2eps^2 + 2n(n-2)^2 beta^2)"""
    _check_n_beta(n, beta)
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    rhs = n * (n - 1) * (n - 2) * beta ** 2 / (2 * eps ** 2 + 2 * n * (n - 2) ** 2 * beta ** 2)
    if rhs > 1.0 + 1e-12:
        raise InfeasibleSeparation(
            f"eps={eps:.6g} too small for beta={beta:.6g} at n={n} (sin^2 = {rhs:.4g})"
        )
    return 2.0 * math.asin(math.sqrt(min(rhs, 1.0)))


def eps_bounds(n: int, beta: float) -> Tuple[float, float]:
    """(sqrt(n-2) beta, 1/sqrt(n(n-1)))"""
    _check_n_beta(n, beta)
    lower = math.sqrt(n - 2) * beta
    upper = 1.0 / math.sqrt(n * (n - 1))
    if lower > upper * (1.0 + 1e-12):
        raise BetaTooLarge(f"beta={beta:.6g} leaves no admissible eps at n={n}")
    return lower, upper


def _construction_rows(rotation, normals: np.ndarray) -> np.ndarray:
    """Rows of P_{a_1} - P_{a_2}; the last state reuses the first normal"""
    n = rotation.n
    rows = [rotation.from_plane(normals[j]) for j in range(n - 1)]
    rows.append(rotation.from_plane(normals[0]))
    return np.array(rows)


def unit_margin(code: SphericalCode, facet: Facet) -> float:
    """Separability margin of the construction per unit eps"""
    n = code.dim + 1
    rotation = rotation_to_hyperplane(n)
    unit = facet_normals(code, facet, 1.0)
    direction = rotation.from_plane(facet.unit_centroid)
    return float((unit @ facet.unit_centroid).min() / np.abs(direction).sum())


def certified_eps(n: int, beta: float, code_kind: str = "simplex") -> float:
    """Smallest eps at which every facet's constructed margin reaches beta"""
    _check_n_beta(n, beta)
    code = make_code(code_kind, n)
    worst = min(unit_margin(code, facet) for facet in facets_of_code(code))
    return beta / worst


def build_instance(cfg: EnsembleConfig, code: SphericalCode, facet: Facet,
                   facet_index: int = -1) -> HardInstance:
    """
    Build (P_{a_1}, P_{a_2}, R) for one facet.

    P_{a_1} is uniform, row j of P_{a_2} is uniform - Pi^T[p_j; 0] and
    R = (I - gamma P_{a_1}) Pi^T[y_hat; 0] scaled to unit 1-norm.
    """
    n = cfg.n
    if code.dim != n - 1:
        raise DimensionMismatch(n - 1, code.dim)
    angle = min_angle(code)
    if angle < cfg.theta - 1e-9:
        raise InfeasibleSeparation(
            f"Code angle {angle:.6g} below the required {cfg.theta:.6g}"
        )

    if facet.normals is not None and facet.eps == cfg.eps:
        normals = facet.normals
    else:
        normals = facet_normals(code, facet, cfg.eps)

    rotation = rotation_to_hyperplane(n)
    uniform = np.full((n, n), 1.0 / n)
    second = uniform - _construction_rows(rotation, normals)
    for row in range(n):
        lowest = second[row].min()
        if lowest < -STRICT_TOL:
            raise InvalidRow(row, float(lowest))

    direction = rotation.from_plane(facet.unit_centroid)
    reward = (np.eye(n) - cfg.gamma * uniform) @ direction
    reward = reward / np.abs(reward).sum()

    transitions = (validate_stochastic(uniform), validate_stochastic(second))
    pair = IrlInstance(gamma=cfg.gamma, transitions=transitions)
    margin = separability_margin(pair, reward)
    if margin < cfg.beta - MARGIN_TOL:
        logger.debug(f"Facet {facet.vertex_indices}: margin {margin:.6g} below beta {cfg.beta:.6g}")

    instance = IrlInstance(
        gamma=cfg.gamma,
        transitions=transitions,
        certified_reward=reward,
        certified_beta=min(cfg.beta, margin),
    )
    return HardInstance(
        instance=instance,
        reward=instance.certified_reward,
        facet_index=facet_index,
        facet=facet.vertex_indices,
        config=cfg,
        margin=margin,
    )


def build_ensemble(cfg: EnsembleConfig) -> List[HardInstance]:
    """One hard instance per facet, ordered by facet index"""
    code = make_code(cfg.code_kind, cfg.n)
    ensemble = []
    for index, facet in enumerate(facets_of_code(code)):
        ensemble.append(build_instance(cfg, code, facet, facet_index=index))

    smallest = min(h.margin for h in ensemble)
    logger.info(
        f"Built {cfg.code_kind} ensemble: n={cfg.n}, size={len(ensemble)}, "
        f"eps={cfg.eps:.6g}, min margin={smallest:.6g}, beta={cfg.beta:.6g}"
    )
    if smallest < cfg.beta - MARGIN_TOL:
        logger.warning(
            f"Constructed margin {smallest:.6g} falls short of beta={cfg.beta:.6g}; "
            f"eps={certified_eps(cfg.n, cfg.beta, cfg.code_kind):.6g} certifies it"
        )
    return ensemble


def verify_ensemble(ensemble: List[HardInstance]) -> EnsembleReport:
    """
    Check own margins >= beta, unit 1-norm rewards and cross exclusion.

    Cross exclusion means instance i paired with reward j (i != j) has some
    strictly negative margin.
    """
    if not ensemble:
        raise ValueError("Cannot verify an empty ensemble")
    cfg = ensemble[0].config
    if any(h.config.model_dump() != cfg.model_dump() for h in ensemble):
        raise ValueError("Ensemble members do not share one configuration")

    own_margins, shortfalls, norm_failures = [], [], []
    for i, member in enumerate(ensemble):
        if abs(np.abs(member.reward).sum() - 1.0) > MARGIN_TOL:
            norm_failures.append(i)
        margin = separability_margin(member.instance, member.reward)
        own_margins.append(margin)
        if margin < cfg.beta - MARGIN_TOL:
            shortfalls.append(i)

    cross_failures = []
    max_cross = None
    for i, member in enumerate(ensemble):
        for j, other in enumerate(ensemble):
            if i == j:
                continue
            margin = separability_margin(member.instance, other.reward)
            max_cross = margin if max_cross is None else max(max_cross, margin)
            if not margin < 0.0:
                cross_failures.append((i, j))

    report = EnsembleReport(
        beta=cfg.beta,
        size=len(ensemble),
        min_own_margin=float(min(own_margins)),
        max_cross_margin=max_cross,
        margin_shortfalls=shortfalls,
        cross_failures=cross_failures,
        norm_failures=norm_failures,
    )
    if report.passed:
        logger.info(f"Ensemble of {len(ensemble)} verified (min margin {report.min_own_margin:.6g})")
    else:
        logger.warning(
            f"Ensemble verification: {len(shortfalls)} margin shortfalls, "
            f"{len(cross_failures)} cross failures, {len(norm_failures)} norm failures"
        )
    return report
