"""Reference solver for the m-slack restricted master.

    min  1@w + (C/m) 1@xi
    s.t. w @ dPsi_i(y) >= Delta(y_i, y) - xi_i   for all i, y != y_i
         w >= 0, xi >= 0

The full LP is built explicitly and solved through its dual, whose variables
are exactly the per-constraint weights ``mu_(i,y)``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import SolverFailure
from .lp import LinearProgram, solve
from .model import DualWeights

DEFAULT_CAP = 10**6


@dataclass
class MslackSolution:
    w: np.ndarray
    xis: np.ndarray
    mu: DualWeights
    objective: float
    keys: list


def build_mslack_lp(task, columns, C, cap=DEFAULT_CAP):
    """The m-slack LP over variables ``[w, xi]`` and its row keys ``(i, y)``."""
    keys, losses, D = task.enumerate_constraints(columns, cap)
    n, m, K = len(columns), task.m, len(keys)
    ex = np.array([k[0] for k in keys], dtype=int)
    slack = sp.csr_matrix((np.ones(K), (np.arange(K), ex)), shape=(K, m))
    A = sp.hstack([sp.csr_matrix(np.asarray(D, float).reshape(K, n)), slack], format="csr")
    cost = np.concatenate([np.ones(n), np.full(m, C / m)])
    return LinearProgram(cost, A, np.asarray(losses, float)), keys


def solve_mslack(task, columns, C, cap=DEFAULT_CAP):
    n, m = len(columns), task.m
    lp, keys = build_mslack_lp(task, columns, C, cap)
    if lp.n_rows == 0:
        return MslackSolution(np.zeros(n), np.zeros(m), DualWeights(), 0.0, keys)
    sol = solve(lp, method="dual")
    if not sol.optimal:
        raise SolverFailure(f"m-slack master is {sol.status}")
    mu = DualWeights()
    for key, value in zip(keys, sol.duals):
        if value > 0:
            mu[key] = value
    return MslackSolution(sol.primal[:n], sol.primal[n:], mu, sol.objective_value, keys)
