"""
MDP data model, Bellman-optimality margins and beta-strict separability.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Set, Tuple

import numpy as np

from irl_core import (
    ENUMERATION_LIMIT,
    MARGIN_TOL,
    POLICY_ITERATION_SWEEPS,
    ROW_SUM_TOL,
    STRICT_TOL,
)
from irl_core.exceptions import (
    DimensionMismatch,
    LpFailure,
    NegativeEntry,
    RowSumViolation,
    SingularSystem,
    TooLarge,
    ZeroReward,
)

logger = logging.getLogger(__name__)

# action index per state
Policy = Tuple[int, ...]

# finite n-vector, one reward per state
RewardVector = np.ndarray


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """Right-stochastic n x n transition matrix"""
    entries: np.ndarray

    def __post_init__(self):
        entries = _frozen(self.entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionMismatch("(n, n)", entries.shape)
        bad = np.argwhere(entries < -STRICT_TOL)
        if bad.size:
            i, j = (int(x) for x in bad[0])
            raise NegativeEntry(i, j, float(entries[i, j]))
        sums = entries.sum(axis=1)
        off = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
        if off.size:
            raise RowSumViolation(int(off[0]), float(sums[off[0]]))
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def row(self, i: int) -> np.ndarray:
        return self.entries[i]


@dataclass(frozen=True, eq=False)
class IrlInstance:
    """MDP without reward; transitions[0] is the designated optimal action"""
    gamma: float
    transitions: Tuple[StochasticMatrix, ...]
    certified_reward: Optional[np.ndarray] = None
    certified_beta: Optional[float] = None
    stacked: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        transitions = tuple(
            t if isinstance(t, StochasticMatrix) else validate_stochastic(t)
            for t in self.transitions
        )
        if len(transitions) < 2:
            raise ValueError("An IRL instance needs at least two actions")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        n = transitions[0].n
        for t in transitions:
            if t.n != n:
                raise DimensionMismatch((n, n), t.entries.shape)
        object.__setattr__(self, "transitions", transitions)
        object.__setattr__(self, "stacked", _frozen(np.stack([t.entries for t in transitions])))

        if self.certified_reward is not None:
            reward = _frozen(self.certified_reward)
            if reward.shape != (n,):
                raise DimensionMismatch((n,), reward.shape)
            if abs(np.abs(reward).sum() - 1.0) > MARGIN_TOL:
                raise ValueError("Certified reward must have unit 1-norm")
            object.__setattr__(self, "certified_reward", reward)
            if self.certified_beta is not None:
                margin = separability_margin(self, reward)
                if margin < self.certified_beta - MARGIN_TOL:
                    raise ValueError(
                        f"Certified reward reaches margin {margin:.6g} < beta {self.certified_beta:.6g}"
                    )

    @property
    def n(self) -> int:
        return self.transitions[0].n

    @property
    def k(self) -> int:
        return len(self.transitions)

    @property
    def optimal_transitions(self) -> np.ndarray:
        return self.stacked[0]


def validate_stochastic(M) -> StochasticMatrix:
    """
    Validate a transition matrix.

    Entries within 1e-12 below zero are clipped, rows within 1e-9 of unit sum
    are renormalized; anything further off raises.
    """
    entries = np.array(M, dtype=float)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise DimensionMismatch("(n, n)", entries.shape)
    if not np.all(np.isfinite(entries)):
        raise ValueError("Transition matrix has non-finite entries")

    bad = np.argwhere(entries < -STRICT_TOL)
    if bad.size:
        i, j = (int(x) for x in bad[0])
        raise NegativeEntry(i, j, float(entries[i, j]))
    entries = np.clip(entries, 0.0, None)

    sums = entries.sum(axis=1)
    off = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
    if off.size:
        raise RowSumViolation(int(off[0]), float(sums[off[0]]))

    return StochasticMatrix(entries / sums[:, None])


def instance_from_arrays(transitions: Sequence, gamma: float,
                         reward: Optional[Sequence[float]] = None,
                         beta: Optional[float] = None) -> IrlInstance:
    """Build an instance from raw arrays, validating every matrix"""
    matrices = tuple(validate_stochastic(t) for t in transitions)
    reward_array = None if reward is None else np.asarray(reward, dtype=float)
    return IrlInstance(gamma=gamma, transitions=matrices,
                       certified_reward=reward_array, certified_beta=beta)


def _as_array(P) -> np.ndarray:
    return P.entries if isinstance(P, StochasticMatrix) else np.asarray(P, dtype=float)


def _check_reward(R, n: int) -> np.ndarray:
    reward = np.asarray(R, dtype=float)
    if reward.shape != (n,):
        raise DimensionMismatch((n,), reward.shape)
    if not np.all(np.isfinite(reward)):
        raise ValueError("Reward has non-finite entries")
    return reward


def policy_value(P_pi, R: RewardVector, gamma: float) -> np.ndarray:
    """V = (I - gamma P_pi)^{-1} R by dense solve"""
    P = _as_array(P_pi)
    n = P.shape[0]
    reward = _check_reward(R, n)
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")

    system = np.eye(n) - gamma * P
    try:
        value = np.linalg.solve(system, reward)
    except np.linalg.LinAlgError as e:
        raise SingularSystem(f"Bellman system is singular: {e}") from e

    residual = np.max(np.abs(system @ value - reward)) if n else 0.0
    if residual > 1e-9 * (1.0 + np.max(np.abs(reward), initial=0.0)):
        raise SingularSystem(f"Bellman solve residual {residual:.3g} too large")
    return value


def margin_operator(inst: IrlInstance) -> np.ndarray:
    """(k-1) n x n stack of (P_{a_1} - P_a)(I - gamma P_{a_1})^{-1}"""
    n = inst.n
    P1 = inst.optimal_transitions
    try:
        G = np.linalg.solve(np.eye(n) - inst.gamma * P1, np.eye(n))
    except np.linalg.LinAlgError as e:
        raise SingularSystem(f"Bellman system is singular: {e}") from e
    return (P1[None, :, :] - inst.stacked[1:]) @ G


def bellman_margins(inst: IrlInstance, R: RewardVector) -> np.ndarray:
    """
    Margin matrix of the Bellman optimality condition for pi = a_1.

    Entry (i, a) is (P_{a_1}(i) - P_{a+1}(i)) (I - gamma P_{a_1})^{-1} R.
    a_1 is optimal iff every entry is >= 0 and uniquely optimal iff every
    entry is > 0.
    """
    reward = _check_reward(R, inst.n)
    value = policy_value(inst.optimal_transitions, reward, inst.gamma)
    diffs = inst.optimal_transitions[None, :, :] - inst.stacked[1:]
    return (diffs @ value).T


def normalize_l1(R: RewardVector) -> RewardVector:
    reward = np.asarray(R, dtype=float)
    norm = np.abs(reward).sum()
    if not norm > 0.0:
        raise ZeroReward()
    return reward / norm


def separability_margin(inst: IrlInstance, R: RewardVector) -> float:
    """Minimum Bellman margin of R scaled to unit 1-norm"""
    reward = _check_reward(R, inst.n)
    return float(bellman_margins(inst, normalize_l1(reward)).min())


def is_strictly_optimal(inst: IrlInstance, R: RewardVector) -> bool:
    """True iff every Bellman margin of R is above the strictness tolerance"""
    reward = _check_reward(R, inst.n)
    if not np.abs(reward).sum() > 0.0:
        return False
    return bool(np.all(bellman_margins(inst, reward) > STRICT_TOL))


def measure_beta(inst: IrlInstance, method: str = "simplex") -> Tuple[float, RewardVector]:
    """
    Largest separability margin over unit-ball rewards.

    Solves  max beta  s.t.  M (R+ - R-) >= beta,  sum(R+ + R-) <= 1,  R+-, >= 0.
    R = 0 is always feasible, so beta* >= 0; beta* == 0 means no reward makes
    a_1 strictly optimal.
    """
    from irl_core.lp import LpProblem, solve_lp

    n = inst.n
    M = margin_operator(inst).reshape(-1, n)
    rows = M.shape[0]

    # variables: R+ (n), R- (n), beta
    c = np.zeros(2 * n + 1)
    c[-1] = -1.0
    constraints = []
    for r in range(rows):
        a = np.concatenate([M[r], -M[r], [-1.0]])
        constraints.append((a, ">=", 0.0))
    constraints.append((np.concatenate([np.ones(2 * n), [0.0]]), "<=", 1.0))
    bounds = [(0.0, None)] * (2 * n) + [(None, None)]

    result = solve_lp(LpProblem(c, constraints, bounds), method=method)
    if result.status != "optimal":
        raise LpFailure(result.status, "max-margin LP")

    reward = result.x[:n] - result.x[n:2 * n]
    beta = float(-result.objective)
    logger.debug(f"measure_beta: beta*={beta:.6g} for n={n}, k={inst.k}")
    return beta, reward


def q_values(inst: IrlInstance, R: RewardVector, policy: Policy) -> np.ndarray:
    """n x k action values of a deterministic policy under state reward R"""
    reward = _check_reward(R, inst.n)
    states = np.arange(inst.n)
    P_pi = inst.stacked[np.asarray(policy), states, :]
    value = policy_value(P_pi, reward, inst.gamma)
    return reward[:, None] + inst.gamma * np.einsum("asj,j->sa", inst.stacked, value)


def _tie_tol(inst: IrlInstance) -> float:
    # Q_{a_1} - Q_a = gamma * margin, so ties use the margin strictness scale
    return inst.gamma * STRICT_TOL


def _is_greedy(inst: IrlInstance, reward: np.ndarray, policy: Policy) -> bool:
    Q = q_values(inst, reward, policy)
    chosen = Q[np.arange(inst.n), np.asarray(policy)]
    return bool(np.all(chosen >= Q.max(axis=1) - _tie_tol(inst)))


def brute_force_optimal_policies(inst: IrlInstance, R: RewardVector) -> Set[Policy]:
    """
    Every Bellman-optimal deterministic policy.

    Enumerates all k^n policies when that is at most 10^6; otherwise runs
    policy iteration from pi = a_1 and returns the converged policy.
    """
    reward = _check_reward(R, inst.n)
    n, k = inst.n, inst.k

    if k ** n <= ENUMERATION_LIMIT:
        return {
            tuple(policy)
            for policy in itertools.product(range(k), repeat=n)
            if _is_greedy(inst, reward, policy)
        }

    logger.info(f"k^n = {k}^{n} above enumeration limit, using policy iteration")
    policy: Policy = tuple([0] * n)
    for _ in range(POLICY_ITERATION_SWEEPS):
        Q = q_values(inst, reward, policy)
        current = Q[np.arange(n), np.asarray(policy)]
        improved = []
        for s in range(n):
            best = int(np.argmax(Q[s]))
            keep = current[s] >= Q[s, best] - _tie_tol(inst)
            improved.append(policy[s] if keep else best)
        if tuple(improved) == policy:
            return {policy}
        policy = tuple(improved)
    raise TooLarge(f"Policy iteration did not converge in {POLICY_ITERATION_SWEEPS} sweeps")


def relabel_actions(inst: IrlInstance, optimal: int) -> IrlInstance:
    """Reindex actions so that `optimal` becomes a_1"""
    if not 0 <= optimal < inst.k:
        raise ValueError(f"Action {optimal} out of range [0, {inst.k})")
    order: List[int] = [optimal] + [a for a in range(inst.k) if a != optimal]
    return IrlInstance(gamma=inst.gamma,
                       transitions=tuple(inst.transitions[a] for a in order))
