"""Shared fixtures for the IRL lab test suite."""

import numpy as np
import pytest

from irl_core import THREADS_ENV_VAR
from irl_core.ensemble import build_ensemble
from irl_core.mdp import instance_from_arrays
from irl_core.schemas import EnsembleConfig

TOL = 1e-9


@pytest.fixture(autouse=True)
def _no_thread_override(monkeypatch):
    monkeypatch.delenv(THREADS_ENV_VAR, raising=False)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def simplex_cfg():
    """n=5, beta=0.01 with the default eps = 1/sqrt(2n(n-1))"""
    return EnsembleConfig.from_regime(5, 0.01)


@pytest.fixture(scope="session")
def simplex_ensemble(simplex_cfg):
    return build_ensemble(simplex_cfg)


@pytest.fixture(scope="session")
def hard_instance(simplex_ensemble):
    return simplex_ensemble[0]


def random_stochastic(rng, n, low=0.5, high=1.5):
    """Strictly positive row-stochastic matrix"""
    raw = rng.uniform(low, high, size=(n, n))
    return raw / raw.sum(axis=1, keepdims=True)


@pytest.fixture
def two_action_instance(rng):
    """Random 4-state, 2-action instance with positive entries"""
    return instance_from_arrays([random_stochastic(rng, 4), random_stochastic(rng, 4)], 0.1)
