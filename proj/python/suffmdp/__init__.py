"""Sufficient feature construction for batch MDP data.

Thin wrappers over the native core. Configurations are plain dicts with the
same keys as the JSON files accepted by the command-line tool; reports come
back as dicts.
"""

import json

import numpy as np

from . import _core
from ._core import NumericalError, ValidationError

__all__ = [
    "NumericalError",
    "ValidationError",
    "construct",
    "dcov_permutation_pvalue",
    "dcov_statistic",
    "pooled_pvalue",
    "run_cli",
    "run_experiment",
    "screen",
    "simulate",
]


def _as_matrix(a):
    a = np.asarray(a, dtype=float)
    return a.reshape(-1, 1) if a.ndim == 1 else a


def _dump(config):
    return "" if config is None else json.dumps(config)


def dcov_statistic(x, y):
    """Squared empirical distance covariance of paired samples (rows)."""
    return _core.dcov_statistic(_as_matrix(x), _as_matrix(y))


def dcov_permutation_pvalue(x, y, permutations=999, seed=0):
    return json.loads(_core.dcov_permutation_pvalue(_as_matrix(x), _as_matrix(y), permutations, seed))


def pooled_pvalue(p_values, u):
    return _core.pooled_pvalue(list(p_values), u)


def simulate(path, model="linear", n_noise=0, n=30, horizon=90, seed=0):
    """Write trajectories from a simulation model to a CSV file."""
    _core.simulate(model, n_noise, n, horizon, seed, str(path))


def screen(path, config=None, seed=0):
    return json.loads(_core.screen(str(path), _dump(config), seed))


def construct(path, config=None, seed=0):
    return json.loads(_core.construct(str(path), _dump(config), seed))


def run_experiment(config):
    """Returns (results CSV text, per-replicate detail dict)."""
    csv, detail = _core.run_experiment(_dump(config))
    return csv, json.loads(detail)


def run_cli(*args):
    return _core.run_cli([str(a) for a in args])
