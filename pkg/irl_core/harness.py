"""
Monte Carlo experiment harness.

Generates beta-separable multi-action instances, samples transitions under
the uniform behaviour policy, runs the registered solvers on the estimated
MDP and records success rates over a grid of sample counts. Also runs the
member-identification experiment on a constructed ensemble.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from irl_core import DEFAULT_BETA_WINDOW, DEFAULT_SEED, DEFAULT_TRIALS, GENERATION_DRAWS
from irl_core.data_io import emit_csv
from irl_core.ensemble import build_ensemble, eps_bounds
from irl_core.eval import binomial_sigma, fano_consistency
from irl_core.exceptions import GenerationTimeout, IrlLabError
from irl_core.mdp import IrlInstance, measure_beta, validate_stochastic
from irl_core.plots import emit_plot
from irl_core.schemas import EnsembleConfig, ExperimentConfig, ResultRow
from irl_core.solvers import get_solver, success_check
from irl_core.trajectory import (
    estimate_from_counts,
    sample_trajectory,
    sample_transition_counts,
    trajectory_log_likelihood,
)
from irl_core.utils import resolve_workers

logger = logging.getLogger(__name__)

# minimum cosine between a sampled deviation and the witness reward
WITNESS_COS = 0.3


def _zero_sum_unit(rng: np.random.Generator, n: int, size: Optional[int] = None) -> np.ndarray:
    shape = (n,) if size is None else (size, n)
    g = rng.standard_normal(shape)
    g -= g.mean(axis=-1, keepdims=True)
    return g / np.linalg.norm(g, axis=-1, keepdims=True)


def _witness_deviations(rng: np.random.Generator, witness: np.ndarray, eps: float,
                        count: int) -> np.ndarray:
    """
    `count` zero-sum vectors of norm <= eps whose direction makes a cosine
    of at least WITNESS_COS with the witness.
    """
    n = witness.size
    g = _zero_sum_unit(rng, n, size=count)
    orth = g - np.outer(g @ witness, witness)
    norms = np.linalg.norm(orth, axis=1, keepdims=True)
    orth = np.where(norms > 1e-12, orth / np.maximum(norms, 1e-12), 0.0)

    cos = rng.uniform(WITNESS_COS, 1.0, size=count)
    directions = cos[:, None] * witness + np.sqrt(1.0 - cos ** 2)[:, None] * orth
    radius = eps * rng.random(count) ** (1.0 / (n - 1))
    return radius[:, None] * directions


def _instance_with_deviations(gamma: float, deviations: np.ndarray) -> IrlInstance:
    k_minus_1, n, _ = deviations.shape
    uniform = np.full((n, n), 1.0 / n)
    transitions = [validate_stochastic(uniform)]
    transitions += [validate_stochastic(uniform - deviations[a]) for a in range(k_minus_1)]
    return IrlInstance(gamma=gamma, transitions=tuple(transitions))


def random_separable_instance(n: int, k: int, gamma: float, target_beta: float,
                              window: float = DEFAULT_BETA_WINDOW, rng_seed: int = DEFAULT_SEED,
                              max_draws: int = GENERATION_DRAWS) -> IrlInstance:
    """
    Random instance with measured separability within `window` of target_beta.

    P_{a_1} is uniform. Every other row is uniform minus a deviation in the
    eps-ball of the zero-sum plane (eps = 1/sqrt(n(n-1)), so rows stay in the
    simplex) drawn around a random witness reward. Deviations are then
    rescaled so the max-margin LP hits the target, which it does exactly up
    to round-off since margins are linear in the deviations. Draws whose
    rescaling would leave the ball are rejected.

    Args:
        window: relative tolerance on the measured beta
        rng_seed: seed for numpy's default_rng; equal seeds give identical instances

    Returns:
        IrlInstance carrying the LP reward and measured beta as its certificate
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    _, eps = eps_bounds(n, target_beta)
    rng = np.random.default_rng(rng_seed)
    low, high = target_beta * (1 - window), target_beta * (1 + window)

    for draw in range(1, max_draws + 1):
        witness = _zero_sum_unit(rng, n)
        deviations = _witness_deviations(rng, witness, eps, (k - 1) * n).reshape(k - 1, n, n)
        beta, _ = measure_beta(_instance_with_deviations(gamma, deviations))
        if not beta > 0:
            continue
        scale = target_beta / beta
        if scale > 1.0:
            continue

        candidate = _instance_with_deviations(gamma, scale * deviations)
        beta, reward = measure_beta(candidate)
        if low <= beta <= high:
            reward = reward / np.abs(reward).sum()
            logger.debug(f"Accepted instance after {draw} draws: beta*={beta:.6g}")
            return IrlInstance(
                gamma=gamma,
                transitions=candidate.transitions,
                certified_reward=reward,
                certified_beta=beta,
            )

    raise GenerationTimeout(max_draws, target_beta)


def _fresh_instance_seed(cfg: ExperimentConfig, trial: int) -> int:
    return cfg.base_seed + 1 + trial


def _estimate(cfg: ExperimentConfig, truth: IrlInstance, m: int,
              rng: np.random.Generator) -> IrlInstance:
    if cfg.test_true_transitions:
        return truth
    if cfg.sample_mode == "single_trajectory":
        counts = sample_transition_counts(truth, m, rng, trajectory_length=m + 1)
    else:
        counts = sample_transition_counts(truth, m, rng, trajectory_length=cfg.trajectory_length)
    return IrlInstance(gamma=truth.gamma, transitions=tuple(estimate_from_counts(counts, cfg.smoothing)))


def _make_solvers(cfg: ExperimentConfig):
    return [get_solver(name, lam=cfg.ng_russell_lambda, r_max=cfg.r_max) for name in cfg.solvers]


def _run_trial(task: Tuple[ExperimentConfig, Optional[IrlInstance], int]) -> Tuple[int, float, np.ndarray]:
    """
    One trial across the whole m grid.

    The sampling stream for grid point i of trial t is seeded by
    (base_seed + t, i), so results do not depend on how trials are scheduled.
    """
    cfg, truth, trial = task
    if truth is None:
        truth = random_separable_instance(
            cfg.n, cfg.k, cfg.gamma, cfg.target_beta, cfg.beta_window,
            rng_seed=_fresh_instance_seed(cfg, trial),
        )
    solvers = _make_solvers(cfg)
    outcome = np.zeros((len(cfg.m_grid), len(solvers)), dtype=bool)

    for mi, m in enumerate(cfg.m_grid):
        rng = np.random.default_rng([cfg.base_seed + trial, mi])
        est = _estimate(cfg, truth, m, rng)
        for si, solver in enumerate(solvers):
            solution = solver.safe_solve(est)
            outcome[mi, si] = success_check(truth, solution.reward)
    return trial, float(truth.certified_beta), outcome


def run_experiment(cfg: ExperimentConfig, instance: Optional[IrlInstance] = None) -> List[ResultRow]:
    """
    Success counts per (m, solver) over cfg.trials independent trials.

    A fixed instance (generated from base_seed unless one is passed) is
    shared by all trials; with fresh_instance every trial draws its own.
    Rows come out ordered by m, then by cfg.solvers, and are identical for
    serial and parallel runs.
    """
    _make_solvers(cfg)  # fail fast on unknown names

    if cfg.fresh_instance:
        truth = None
    elif instance is not None:
        truth = instance
    else:
        truth = random_separable_instance(
            cfg.n, cfg.k, cfg.gamma, cfg.target_beta, cfg.beta_window, rng_seed=cfg.base_seed,
        )
    if truth is not None and truth.certified_beta is None:
        beta, reward = measure_beta(truth)
        if not beta > 0:
            raise ValueError("The supplied instance has no strictly separating reward")
        truth = IrlInstance(gamma=truth.gamma, transitions=truth.transitions,
                            certified_reward=reward / np.abs(reward).sum(), certified_beta=beta)

    tasks = [(cfg, truth, t) for t in range(cfg.trials)]
    workers = min(resolve_workers(cfg.workers), cfg.trials)
    logger.info(
        f"Running {cfg.trials} trials x {len(cfg.m_grid)} grid points "
        f"(n={cfg.n}, k={cfg.k}, solvers={', '.join(cfg.solvers)}, workers={workers})"
    )

    if workers > 1:
        chunk = max(1, cfg.trials // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_run_trial, tasks, chunksize=chunk))
    else:
        results = [_run_trial(task) for task in tasks]

    results.sort(key=lambda item: item[0])
    betas = [beta for _, beta, _ in results]
    successes = np.sum([outcome for _, _, outcome in results], axis=0)
    instance_beta = float(np.mean(betas))

    rows = []
    for mi, m in enumerate(cfg.m_grid):
        for si, solver in enumerate(cfg.solvers):
            count = int(successes[mi, si])
            rows.append(ResultRow(
                solver=solver, n=cfg.n, k=cfg.k, gamma=cfg.gamma, beta=instance_beta,
                m=m, trials=cfg.trials, successes=count,
                success_rate=count / cfg.trials, seed=cfg.base_seed,
            ))
        rates = ", ".join(f"{r.solver}={r.success_rate:.2f}" for r in rows[-len(cfg.solvers):])
        logger.info(f"m={m}: {rates}")

    if cfg.out_csv:
        emit_csv(rows, cfg.out_csv)
    if cfg.out_plot:
        emit_plot(rows, cfg, cfg.out_plot)
    return rows


def _identify(ensemble, traj, rng: np.random.Generator) -> int:
    """Maximum-likelihood member index, ties broken uniformly at random"""
    scores = np.array([trajectory_log_likelihood(member.instance, traj) for member in ensemble])
    best = np.flatnonzero(scores >= scores.max() - 1e-12)
    return int(rng.choice(best))


def run_identification_experiment(cfg_ens: EnsembleConfig, m_values: Sequence[int],
                                  trials: int = DEFAULT_TRIALS,
                                  base_seed: int = DEFAULT_SEED) -> pd.DataFrame:
    """
    Error rate of the maximum-likelihood classifier that names which
    ensemble member generated an m-state trajectory, next to the clamped
    Fano lower bound for the same ensemble size.
    """
    from irl_core.bounds import fano_error_lower_bound

    if trials < 1:
        raise ValueError("trials must be at least 1")
    ensemble = build_ensemble(cfg_ens)
    size = len(ensemble)

    records = []
    for mi, m in enumerate(m_values):
        errors = 0
        for t in range(trials):
            rng = np.random.default_rng([base_seed + t, mi])
            truth = int(rng.integers(size))
            traj = sample_trajectory(ensemble[truth].instance, m, int(rng.integers(2 ** 32)))
            if _identify(ensemble, traj, rng) != truth:
                errors += 1

        try:
            bound = fano_error_lower_bound(cfg_ens.n, cfg_ens.eps, cfg_ens.beta, m,
                                           ensemble_size_override=size)
        except IrlLabError as e:
            logger.warning(f"Fano bound unavailable at m={m}: {e}")
            bound = math.nan

        rate = errors / trials
        consistent = True if math.isnan(bound) else fano_consistency(errors, trials, bound)
        records.append({
            "m": m,
            "trials": trials,
            "errors": errors,
            "error_rate": rate,
            "fano_lb": bound,
            "sigma": math.nan if math.isnan(bound) else binomial_sigma(bound, trials),
            "consistent": consistent,
        })
        logger.info(f"identification m={m}: error={rate:.3f}, fano bound={bound:.3f}")

    return pd.DataFrame(records)
