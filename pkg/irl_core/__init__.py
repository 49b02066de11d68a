"""
IRL Core - hard inverse reinforcement learning instances and sample-complexity bounds

This package contains the core logic for the IRL lab including:
- MDP data model, Bellman margins and separability certification
- Spherical codes, facets and the hyperplane rotation
- Hard ensemble construction and verification
- Closed-form information-theoretic bounds
- Trajectory sampling and KL machinery
- LP solver and reward recovery methods
- Monte Carlo experiment harness
"""

__version__ = "1.0.0"
__author__ = "IRL Lab Development Team"

# Numerical tolerances
STRICT_TOL = 1e-12
ROW_SUM_TOL = 1e-9
GEOMETRY_TOL = 1e-10
MARGIN_TOL = 1e-9

# Experiment defaults
DEFAULT_GAMMA = 0.1
DEFAULT_SMOOTHING = 1e-3
DEFAULT_TRAJECTORY_LENGTH = 10
DEFAULT_TRIALS = 100
DEFAULT_BETA_WINDOW = 0.15
DEFAULT_SEED = 0

# Size guards
ENUMERATION_LIMIT = 10**6
TRAJECTORY_ENUMERATION_LIMIT = 10**7
POLICY_ITERATION_SWEEPS = 10**4
GENERATION_DRAWS = 10**5

CODE_KINDS = ["simplex", "icosahedron"]
SOLVER_NAMES = ["ng_russell", "l1_svm"]
CSV_COLUMNS = [
    "solver", "n", "k", "gamma", "beta", "m",
    "trials", "successes", "success_rate", "seed",
]

THREADS_ENV_VAR = "IRL_LAB_THREADS"
