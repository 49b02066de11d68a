"""
Configuration and record schemas for the IRL lab using Pydantic.
"""

import math
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from irl_core import (
    DEFAULT_BETA_WINDOW,
    DEFAULT_GAMMA,
    DEFAULT_SEED,
    DEFAULT_SMOOTHING,
    DEFAULT_TRAJECTORY_LENGTH,
    DEFAULT_TRIALS,
    SOLVER_NAMES,
)


def default_m_grid() -> List[int]:
    """16 log-spaced sample counts from 10 to 10^6"""
    grid = []
    for exponent in [1 + 5 * t / 15 for t in range(16)]:
        value = int(round(10 ** exponent))
        if not grid or value > grid[-1]:
            grid.append(value)
    return grid


class EnsembleConfig(BaseModel):
    """Parameters tying beta, eps and theta together for one ensemble"""
    n: int = Field(..., ge=3)
    gamma: float = Field(default=DEFAULT_GAMMA, gt=0, lt=1)
    beta: float = Field(..., gt=0)
    eps: float = Field(..., gt=0)
    theta: float = 0.0
    code_kind: Literal["simplex", "icosahedron"] = "simplex"

    @model_validator(mode="after")
    def check_admissible(self):
        from irl_core.ensemble import eps_bounds, theta_from_beta_eps

        if self.code_kind == "icosahedron" and self.n != 4:
            raise ValueError("The icosahedron code only exists for n = 4")
        lower, upper = eps_bounds(self.n, self.beta)
        slack = 1e-12 * max(1.0, upper)
        if self.eps < lower - slack or self.eps > upper + slack:
            raise ValueError(
                f"eps={self.eps:.6g} outside admissible range [{lower:.6g}, {upper:.6g}]"
            )
        self.theta = theta_from_beta_eps(self.n, self.beta, self.eps)
        return self

    @classmethod
    def from_regime(cls, n: int, beta: float, eps: Optional[float] = None,
                    gamma: float = DEFAULT_GAMMA, code_kind: str = "simplex",
                    regime: str = "default") -> "EnsembleConfig":
        """
        Build a config, choosing eps from a named regime when not given.

        Regimes:
            default   - min(1/sqrt(2n(n-1)), upper bound of the admissible range)
            simplex   - eps = sqrt(n-2) * beta (simplex angle)
            certified - smallest admissible eps whose construction margin reaches beta
        """
        from irl_core.ensemble import certified_eps, eps_bounds

        lower, upper = eps_bounds(n, beta)
        if eps is None:
            if regime == "simplex":
                eps = lower
            elif regime == "certified":
                eps = max(lower, certified_eps(n, beta, code_kind))
                if eps > upper:
                    from irl_core.exceptions import BetaTooLarge
                    raise BetaTooLarge(
                        f"Certified eps {eps:.6g} exceeds the inradius {upper:.6g}"
                    )
            elif regime == "default":
                eps = min(1.0 / math.sqrt(2 * n * (n - 1)), upper)
                eps = max(eps, lower)
            else:
                raise ValueError(f"Unknown eps regime '{regime}'")
        return cls(n=n, beta=beta, eps=eps, gamma=gamma, code_kind=code_kind)


class EnsembleReport(BaseModel):
    """Verification outcome for a constructed ensemble"""
    beta: float
    size: int
    min_own_margin: float
    max_cross_margin: Optional[float] = None
    margin_shortfalls: List[int] = Field(default_factory=list)
    cross_failures: List[Tuple[int, int]] = Field(default_factory=list)
    norm_failures: List[int] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not (self.margin_shortfalls or self.cross_failures or self.norm_failures)


class InstanceRecord(BaseModel):
    """JSON record of one IRL instance"""
    n: int = Field(..., ge=1)
    k: int = Field(..., ge=2)
    gamma: float = Field(..., gt=0, lt=1)
    transitions: List[List[List[float]]]
    reward: Optional[List[float]] = None
    beta: Optional[float] = None

    @model_validator(mode="after")
    def check_shapes(self):
        if len(self.transitions) != self.k:
            raise ValueError(f"Expected {self.k} transition matrices, got {len(self.transitions)}")
        for a, matrix in enumerate(self.transitions):
            if len(matrix) != self.n or any(len(row) != self.n for row in matrix):
                raise ValueError(f"Transition matrix {a} is not {self.n}x{self.n}")
        if self.reward is not None and len(self.reward) != self.n:
            raise ValueError(f"Reward has {len(self.reward)} entries, expected {self.n}")
        return self


class EnsembleManifest(BaseModel):
    """Index file written next to an ensemble's instance files"""
    config: EnsembleConfig
    files: List[str]
    facets: List[List[int]]
    margins: List[float]
    report: EnsembleReport


class ExperimentConfig(BaseModel):
    """Monte Carlo experiment parameters"""
    n: int = Field(..., ge=2)
    k: int = Field(..., ge=2)
    gamma: float = Field(default=DEFAULT_GAMMA, gt=0, lt=1)
    target_beta: float = Field(..., gt=0)
    beta_window: float = Field(default=DEFAULT_BETA_WINDOW, gt=0, lt=1)
    m_grid: List[int] = Field(default_factory=default_m_grid)
    trials: int = Field(default=DEFAULT_TRIALS, ge=1)
    trajectory_length: int = Field(default=DEFAULT_TRAJECTORY_LENGTH, ge=2)
    sample_mode: Literal["transitions", "single_trajectory"] = "transitions"
    solvers: List[str] = Field(default_factory=lambda: list(SOLVER_NAMES))
    base_seed: int = Field(default=DEFAULT_SEED, ge=0)
    upper_line: Optional[float] = Field(default=None, gt=0)
    out_csv: Optional[str] = None
    out_plot: Optional[str] = None
    fresh_instance: bool = False
    workers: Optional[int] = Field(default=None, ge=1)
    smoothing: float = Field(default=DEFAULT_SMOOTHING, ge=0)
    ng_russell_lambda: float = Field(default=0.0, ge=0)
    r_max: float = Field(default=1.0, gt=0)
    test_true_transitions: bool = False

    @field_validator("m_grid")
    @classmethod
    def validate_grid(cls, v):
        if not v:
            raise ValueError("m_grid must not be empty")
        if any(m < 1 for m in v):
            raise ValueError("Sample counts must be positive")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("m_grid must be strictly ascending")
        return v

    @field_validator("solvers")
    @classmethod
    def validate_solvers(cls, v):
        if not v:
            raise ValueError("At least one solver is required")
        return v


class ResultRow(BaseModel):
    """Success count for one (solver, m) grid point"""
    solver: str
    n: int
    k: int
    gamma: float
    beta: float
    m: int = Field(..., ge=1)
    trials: int = Field(..., ge=1)
    successes: int = Field(..., ge=0)
    success_rate: float = Field(..., ge=0, le=1)
    seed: int

    @model_validator(mode="after")
    def check_rate(self):
        if self.successes > self.trials:
            raise ValueError("successes cannot exceed trials")
        if abs(self.success_rate - self.successes / self.trials) > 1e-9:
            raise ValueError("success_rate must equal successes / trials")
        return self


class BoundReport(BaseModel):
    """Every closed-form bound evaluated at one parameter point"""
    n: int
    eps: float
    beta: float
    theta: float
    m: int
    N_lower: float
    N_lower_asymptotic: bool = True
    facets_lower: float
    ensemble_lower: float
    eta: float
    kl_col: float
    kl_traj: float
    fano_error_lb: Optional[float] = None
    fano_unclamped: Optional[float] = None
    centroid_dot_lb: Optional[float] = None
    m_threshold_simplex: Optional[float] = None
    m_threshold_beta: Optional[float] = None
    vacuous: Dict[str, bool] = Field(default_factory=dict)
