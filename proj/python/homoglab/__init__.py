"""Python access to the homoglab solvers.

Arrays are m x m with rows along x2. Kernels are given as (family, radius).
"""

import json as _json

from ._homoglab import (
    CompatibilityViolation,
    ConfigError,
    DisconnectedRegion,
    InvalidSpec,
    NonConvergence,
    cell_tensor,
    kernel_mass,
    kernel_value,
    lambda_min,
    partition,
    poincare_constant,
    solve,
    solve_limit,
)
from ._homoglab import _run_json as _homoglab_run


def run_experiment(config, jobs=1):
    """Run a config (dict or JSON string); returns verdicts, the sweep CSV and the tensor if any."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_homoglab_run(text, jobs))

__all__ = [
    "CompatibilityViolation",
    "ConfigError",
    "DisconnectedRegion",
    "InvalidSpec",
    "NonConvergence",
    "cell_tensor",
    "kernel_mass",
    "kernel_value",
    "lambda_min",
    "partition",
    "poincare_constant",
    "run_experiment",
    "solve",
    "solve_limit",
]
