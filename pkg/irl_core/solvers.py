"""
Reward recovery methods for the IRL experiments.
Includes the Ng-Russell LP and an L1-regularized max-margin LP behind a
small solver registry.
"""

import inspect
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Type

import numpy as np

from irl_core.exceptions import IrlLabError, UnknownSolver
from irl_core.lp import LpProblem, solve_lp
from irl_core.mdp import IrlInstance, margin_operator, is_strictly_optimal

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class IrlSolution:
    """Recovered reward, present only when the LP reached optimality"""
    reward: Optional[np.ndarray]
    status: str
    objective_value: float = float("nan")

    def __post_init__(self):
        if (self.reward is not None) != (self.status == "optimal"):
            raise ValueError("A reward is present iff the status is optimal")


def _margin_rows(est: IrlInstance) -> np.ndarray:
    """n(k-1) x n matrix whose rows are the Bellman margin functionals"""
    return margin_operator(est).reshape(-1, est.n)


def irl_ng_russell(est: IrlInstance, lam: float = 0.0, r_max: float = 1.0,
                   method: str = "simplex") -> IrlSolution:
    """
    Classic LP reward recovery.

    maximize  sum_i min_{a != a_1} M_{i,a} R - lam |R|_1
    s.t.      M_{i,a} R >= 0,  |R_i| <= r_max

    Variables are [R (n), t (n), u (n)] with 0 <= t_i <= M_{i,a} R and u >= |R|;
    t >= 0 carries the M R >= 0 rows.
    """
    n = est.n
    M = _margin_rows(est)
    per_state = est.k - 1
    nvars = 3 * n

    c = np.zeros(nvars)
    c[n:2 * n] = -1.0
    c[2 * n:] = lam

    constraints = []
    for row_index, row in enumerate(M):
        i = row_index % n
        a = np.zeros(nvars)
        a[:n] = row
        a[n + i] = -1.0
        constraints.append((a, ">=", 0.0))
    for i in range(n):
        upper = np.zeros(nvars)
        upper[i], upper[2 * n + i] = 1.0, -1.0
        constraints.append((upper, "<=", 0.0))
        lower = np.zeros(nvars)
        lower[i], lower[2 * n + i] = -1.0, -1.0
        constraints.append((lower, "<=", 0.0))

    bounds = [(-r_max, r_max)] * n + [(0.0, None)] * 2 * n
    result = solve_lp(LpProblem(c, constraints, bounds), method=method)
    if result.status != "optimal":
        logger.debug(f"Ng-Russell LP status {result.status} (n={n}, k={per_state + 1})")
        return IrlSolution(reward=None, status=result.status)
    return IrlSolution(reward=result.x[:n], status="optimal", objective_value=-result.objective)


def irl_l1_svm(est: IrlInstance, method: str = "simplex") -> IrlSolution:
    """
    Minimum 1-norm reward with every Bellman margin at least 1.

    The recovered reward is returned with unit 1-norm.
    """
    n = est.n
    M = _margin_rows(est)
    nvars = 2 * n

    c = np.concatenate([np.zeros(n), np.ones(n)])
    constraints = [(np.concatenate([row, np.zeros(n)]), ">=", 1.0) for row in M]
    for i in range(n):
        upper = np.zeros(nvars)
        upper[i], upper[n + i] = 1.0, -1.0
        constraints.append((upper, "<=", 0.0))
        lower = np.zeros(nvars)
        lower[i], lower[n + i] = -1.0, -1.0
        constraints.append((lower, "<=", 0.0))

    bounds = [(None, None)] * n + [(0.0, None)] * n
    result = solve_lp(LpProblem(c, constraints, bounds), method=method)
    if result.status != "optimal":
        logger.debug(f"L1-SVM LP status {result.status} (n={n})")
        return IrlSolution(reward=None, status=result.status)

    reward = result.x[:n]
    norm = np.abs(reward).sum()
    if not norm > 0:
        return IrlSolution(reward=None, status="numerical_failure")
    return IrlSolution(reward=reward / norm, status="optimal", objective_value=result.objective)


def success_check(truth: IrlInstance, recovered) -> bool:
    """True iff pi = a_1 is the unique optimal policy of the true MDP under `recovered`"""
    if recovered is None:
        return False
    reward = np.asarray(recovered, dtype=float)
    if reward.shape != (truth.n,) or not np.all(np.isfinite(reward)):
        return False
    return is_strictly_optimal(truth, reward)


class BaseSolver:
    """Base class for reward recovery methods"""

    name = "base"

    def __init__(self, lp_method: str = "simplex"):
        self.lp_method = lp_method

    def solve(self, est: IrlInstance) -> IrlSolution:
        """Recover a reward from estimated transitions"""
        raise NotImplementedError

    def safe_solve(self, est: IrlInstance) -> IrlSolution:
        """solve(), with domain and linear-algebra errors mapped to a failed status"""
        try:
            return self.solve(est)
        except (IrlLabError, np.linalg.LinAlgError) as e:
            logger.warning(f"{self.name} failed: {e}")
            return IrlSolution(reward=None, status="numerical_failure")

    def get_solver_info(self) -> Dict[str, object]:
        return {"name": self.name, "lp_method": self.lp_method}


SOLVER_REGISTRY: Dict[str, Type[BaseSolver]] = {}


def register_solver(cls: Type[BaseSolver]) -> Type[BaseSolver]:
    """Class decorator adding a solver under its `name`"""
    SOLVER_REGISTRY[cls.name] = cls
    return cls


@register_solver
class NgRussellSolver(BaseSolver):
    """Ng-Russell LP with l1 penalty lam and box r_max"""

    name = "ng_russell"

    def __init__(self, lam: float = 0.0, r_max: float = 1.0, lp_method: str = "simplex"):
        super().__init__(lp_method)
        self.lam = lam
        self.r_max = r_max

    def solve(self, est: IrlInstance) -> IrlSolution:
        return irl_ng_russell(est, self.lam, self.r_max, method=self.lp_method)

    def get_solver_info(self) -> Dict[str, object]:
        info = super().get_solver_info()
        info.update({"lambda": self.lam, "r_max": self.r_max})
        return info


@register_solver
class L1SvmSolver(BaseSolver):
    """Margin-one LP with minimum 1-norm"""

    name = "l1_svm"

    def solve(self, est: IrlInstance) -> IrlSolution:
        return irl_l1_svm(est, method=self.lp_method)


def get_solver(name: str, **kwargs) -> BaseSolver:
    """Instantiate a registered solver, passing only the options it accepts"""
    if name not in SOLVER_REGISTRY:
        raise UnknownSolver(name, SOLVER_REGISTRY.keys())
    cls = SOLVER_REGISTRY[name]
    accepted = inspect.signature(cls.__init__).parameters
    options = {key: value for key, value in kwargs.items() if key in accepted}
    return cls(**options)


def available_solvers() -> List[str]:
    return sorted(SOLVER_REGISTRY)


def solver_from_callable(name: str, fn: Callable[[IrlInstance], IrlSolution]) -> Type[BaseSolver]:
    """Register a plain function (est -> IrlSolution) as a solver"""

    class _Wrapped(BaseSolver):
        def solve(self, est: IrlInstance) -> IrlSolution:
            return fn(est)

    _Wrapped.name = name
    _Wrapped.__name__ = f"{name.title().replace('_', '')}Solver"
    return register_solver(_Wrapped)
