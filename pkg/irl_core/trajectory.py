"""
Trajectory sampling under the uniform behaviour policy, transition estimation
and KL divergence machinery for Markov trajectories.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import rel_entr

from irl_core import DEFAULT_TRAJECTORY_LENGTH, TRAJECTORY_ENUMERATION_LIMIT
from irl_core.exceptions import AbsoluteContinuityViolation, TooLarge, ZeroEntry
from irl_core.mdp import IrlInstance, StochasticMatrix, validate_stochastic

logger = logging.getLogger(__name__)

# transitions simulated per vectorized batch
BATCH_TRANSITIONS = 1_000_000


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Visited states s_0..s_{m-1} and the actions taken between them"""
    states: np.ndarray
    actions: np.ndarray

    def __post_init__(self):
        if len(self.actions) != max(len(self.states) - 1, 0):
            raise ValueError("A trajectory of m states has m-1 actions")

    @property
    def initial_state(self) -> int:
        return int(self.states[0])

    @property
    def steps(self) -> List[Tuple[int, int, int]]:
        return [
            (int(s), int(a), int(t))
            for s, a, t in zip(self.states[:-1], self.actions, self.states[1:])
        ]

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True, eq=False)
class TransitionCounts:
    """k x n x n transition counts and k x n visit counts"""
    counts: np.ndarray

    @property
    def visits(self) -> np.ndarray:
        return self.counts.sum(axis=2)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def _as_array(P) -> np.ndarray:
    return P.entries if isinstance(P, StochasticMatrix) else np.asarray(P, dtype=float)


def _cumulative(stacked: np.ndarray) -> np.ndarray:
    cum = np.cumsum(stacked, axis=-1)
    cum[..., -1] = 1.0
    return cum


def _next_states(cum_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw, one per row of cum_rows"""
    n = cum_rows.shape[-1]
    return np.minimum((cum_rows <= u[:, None]).sum(axis=1), n - 1)


def sample_trajectory(inst: IrlInstance, m: int, rng_seed: int) -> Trajectory:
    """m-state trajectory: uniform start, uniform action per step"""
    if m < 1:
        raise ValueError("m must be at least 1")
    rng = np.random.default_rng(rng_seed)
    n, k = inst.n, inst.k
    cum = _cumulative(inst.stacked)

    states = np.empty(m, dtype=np.int64)
    states[0] = rng.integers(n)
    actions = rng.integers(k, size=m - 1)
    uniforms = rng.random(m - 1)
    for t in range(m - 1):
        row = cum[actions[t], states[t]]
        states[t + 1] = min(int(np.searchsorted(row, uniforms[t], side="right")), n - 1)
    return Trajectory(states=states, actions=actions)


def count_transitions(trajs: Sequence[Trajectory], n: int, k: int) -> TransitionCounts:
    counts = np.zeros(k * n * n, dtype=np.int64)
    for traj in trajs:
        if len(traj) < 2:
            continue
        flat = (traj.actions * n + traj.states[:-1]) * n + traj.states[1:]
        counts += np.bincount(flat, minlength=k * n * n)
    return TransitionCounts(counts=counts.reshape(k, n, n))


def sample_transition_counts(inst: IrlInstance, m: int, rng: np.random.Generator,
                             trajectory_length: int = DEFAULT_TRAJECTORY_LENGTH) -> TransitionCounts:
    """
    Counts of exactly m observed transitions.

    Trajectories of `trajectory_length` states are simulated in vectorized
    batches until m transitions are collected; the last one is truncated.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if trajectory_length < 2:
        raise ValueError("trajectory_length must be at least 2")
    n, k = inst.n, inst.k
    cum = _cumulative(inst.stacked)
    per_traj = trajectory_length - 1
    counts = np.zeros(k * n * n, dtype=np.int64)

    remaining = m
    while remaining > 0:
        batch = min(-(-remaining // per_traj), max(1, BATCH_TRANSITIONS // per_traj))
        states = rng.integers(n, size=batch)
        flat_steps = []
        for _ in range(per_traj):
            actions = rng.integers(k, size=batch)
            nxt = _next_states(cum[actions, states], rng.random(batch))
            flat_steps.append((actions * n + states) * n + nxt)
            states = nxt
        # trajectory-major order so truncation drops the tail of the last one
        flat = np.stack(flat_steps, axis=1).reshape(-1)[:remaining]
        counts += np.bincount(flat, minlength=k * n * n)
        remaining -= flat.size

    return TransitionCounts(counts=counts.reshape(k, n, n))


def estimate_from_counts(counts: TransitionCounts, smoothing: float = 0.0) -> List[StochasticMatrix]:
    """(count + s) / (visits + n s) per row; unvisited rows are uniform"""
    if smoothing < 0:
        raise ValueError("smoothing must be nonnegative")
    raw = counts.counts.astype(float)
    k, n, _ = raw.shape
    visits = raw.sum(axis=2, keepdims=True)
    denominator = visits + n * smoothing
    with np.errstate(invalid="ignore", divide="ignore"):
        estimate = np.where(denominator > 0, (raw + smoothing) / denominator, 1.0 / n)
    estimate[np.broadcast_to(visits == 0, estimate.shape)] = 1.0 / n
    return [validate_stochastic(estimate[a]) for a in range(k)]


def estimate_transitions(trajs: Sequence[Trajectory], n: int, k: int,
                         smoothing: float = 0.0) -> List[StochasticMatrix]:
    """Empirical transition matrices from trajectories"""
    return estimate_from_counts(count_transitions(trajs, n, k), smoothing)


def _kl_vector(p: np.ndarray, q: np.ndarray, row: Optional[int] = None) -> float:
    bad = np.flatnonzero((p > 0) & (q <= 0))
    if bad.size:
        raise AbsoluteContinuityViolation(row, int(bad[0]))
    return float(rel_entr(p, q).sum())


def kl_rows(P, Q) -> np.ndarray:
    """V_i = D(P(i) || Q(i)) in nats"""
    A, B = _as_array(P), _as_array(Q)
    if A.shape != B.shape:
        raise ValueError(f"Shape mismatch {A.shape} vs {B.shape}")
    return np.array([_kl_vector(A[i], B[i], i) for i in range(A.shape[0])])


def kl_quadratic_bound(p_row, q_row) -> float:
    """1/2 sum_j (q_j - p_j)^2 / p_j"""
    p = np.asarray(p_row, dtype=float)
    q = np.asarray(q_row, dtype=float)
    if np.any(p <= 0):
        raise ZeroEntry("Reference row must be strictly positive")
    return float(0.5 * np.sum((q - p) ** 2 / p))


def exact_trajectory_kl(P, Q, init, m: int, init_q=None) -> float:
    """
    KL between the m-state trajectory distributions of two chains.

    Chain rule: sum_{t<m-1} (init P^t) . V + D(init_p || init_q), where
    V holds the per-row divergences.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    A = _as_array(P)
    p0 = np.asarray(init, dtype=float)
    q0 = p0 if init_q is None else np.asarray(init_q, dtype=float)
    total = _kl_vector(p0, q0)
    if m == 1:
        return total

    V = kl_rows(A, Q)
    dist = p0.copy()
    for _ in range(m - 1):
        total += float(dist @ V)
        dist = dist @ A
    return total


def brute_force_trajectory_kl(P, Q, init, m: int, init_q=None) -> float:
    """Exact KL by enumerating all n^m state sequences"""
    A, B = _as_array(P), _as_array(Q)
    n = A.shape[0]
    if n ** m > TRAJECTORY_ENUMERATION_LIMIT:
        raise TooLarge(f"n^m = {n}^{m} exceeds {TRAJECTORY_ENUMERATION_LIMIT}")
    p0 = np.asarray(init, dtype=float)
    q0 = p0 if init_q is None else np.asarray(init_q, dtype=float)

    with np.errstate(divide="ignore"):
        log_p, log_q = np.log(p0), np.log(q0)
        log_A, log_B = np.log(A), np.log(B)
    for _ in range(m - 1):
        last = np.arange(log_p.size) % n
        log_p = (log_p[:, None] + log_A[last]).reshape(-1)
        log_q = (log_q[:, None] + log_B[last]).reshape(-1)

    prob = np.exp(log_p)
    support = prob > 0
    if np.any(np.isneginf(log_q[support])):
        raise AbsoluteContinuityViolation(None, int(np.flatnonzero(support & np.isneginf(log_q))[0]))
    return float(np.sum(prob[support] * (log_p[support] - log_q[support])))


def chain_over_actions(transitions: Sequence) -> StochasticMatrix:
    """nk x nk chain over (state, action) pairs with uniformly random actions"""
    stacked = np.stack([_as_array(t) for t in transitions])
    k, n, _ = stacked.shape
    # E[(s, a), (s', a')] = P_a(s, s') / k, pairs indexed s * k + a
    blocks = np.repeat(stacked.transpose(1, 0, 2)[..., None], k, axis=3) / k
    return validate_stochastic(blocks.reshape(n * k, n * k))


def extended_chain(inst: IrlInstance) -> StochasticMatrix:
    return chain_over_actions(inst.transitions)


def trajectory_log_likelihood(inst: IrlInstance, traj: Trajectory) -> float:
    """log-probability of the observed transitions given the actions taken"""
    if len(traj) < 2:
        return 0.0
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(inst.stacked[traj.actions, traj.states[:-1], traj.states[1:]])))
