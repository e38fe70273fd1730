"""Common machinery for task plug-ins.

A task owns one training (or evaluation) set and exposes the handful of
operations the solvers need, all vectorised over examples:

* ``delta_psi_pairs(columns, idx, ys)``: rows ``Psi(x_i, y_i) - Psi(x_i, y)``
* ``loss_pairs(idx, ys)``: ``Delta(y_i, y)``
* ``infer(w, columns)``: loss-augmented argmax per example
* ``propose(mu, params)``: the weak-learner subproblem

Here "example" means one margin group: a sample for classification, a pair
for ranking, an image for CRF learning.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import CapacityError
from ..weak import PM_ONE, train_perceptron, train_stump


@dataclass
class Proposal:
    columns: list
    edge: float
    selected: object


class StructTask:
    descriptor = None
    m = 0

    def __init__(self):
        self._cache = {}

    # -- column evaluation -------------------------------------------------

    def _evaluate(self, learner, part):
        raise NotImplementedError

    def outputs(self, column):
        key = (column.learner, column.part)
        out = self._cache.get(key)
        if out is None:
            out = self._evaluate(column.learner, column.part)
            self._cache[key] = out
        return out

    # -- label bookkeeping ------------------------------------------------

    def initial_labels(self):
        """Deterministic ``y_i^(0)`` for Algorithm-1 initialisation."""
        raise NotImplementedError

    def cutting_plane_labels(self):
        """Deterministic ``y'_i`` seeding an empty working set."""
        return self.initial_labels()

    def loss_pairs(self, idx, ys):
        raise NotImplementedError

    def loss_vector(self, ylist):
        return self.loss_pairs(np.arange(self.m), ylist)

    def delta_psi_pairs(self, columns, idx, ys):
        raise NotImplementedError

    def delta_psi_rows(self, columns, ylist):
        return self.delta_psi_pairs(columns, np.arange(self.m), ylist)

    def infer(self, w, columns):
        """``argmax_y Delta(y_i, y) - w @ dPsi_i(y)`` for every example."""
        raise NotImplementedError

    def enumerate_constraints(self, columns, cap=10**6):
        """All ``(i, y != y_i)`` margin constraints: keys, losses, dPsi rows."""
        raise CapacityError(f"{self.descriptor.kind} label space is not enumerable; "
                            "use the one-slack solver")

    # -- duals and the subproblem -----------------------------------------

    def mu_arrays(self, mu):
        keys = list(mu)
        idx = np.array([k[0] for k in keys], dtype=int)
        ys = [k[1] for k in keys]
        vals = np.array([mu[k] for k in keys], dtype=float)
        return idx, ys, vals

    def column_edges(self, mu, columns):
        """``sum_{i,y} mu_(i,y) dpsi_i(y)`` for each column."""
        if not columns:
            return np.zeros(0)
        if len(mu) == 0:
            return np.zeros(len(columns))
        idx, ys, vals = self.mu_arrays(mu)
        return vals @ self.delta_psi_pairs(columns, idx, ys)

    def propose(self, mu, params):
        raise NotImplementedError

    def predict(self, w, columns):
        raise NotImplementedError


def fit_weak(X, d, params, output_range=PM_ONE):
    """Train the configured weak learner on signed weights ``d``."""
    threads = getattr(params, "threads", 1)
    stump, edge = train_stump(X, d, output_range, threads=threads)
    if getattr(params, "weak", "stump") == "perceptron":
        return train_perceptron(X, d, init=stump, output_range=output_range)
    return stump, edge


def enumerate_finite(task, columns, labels_of, cap):
    """Shared m-slack constraint enumeration for finite label spaces."""
    idx, ys = [], []
    for i in range(task.m):
        for y in labels_of(i):
            idx.append(i)
            ys.append(y)
            if len(idx) > cap:
                raise CapacityError(
                    f"more than {cap} margin constraints; use the one-slack solver")
    idx = np.array(idx, dtype=int)
    keys = list(zip(idx.tolist(), ys))
    return keys, task.loss_pairs(idx, ys), task.delta_psi_pairs(columns, idx, ys)
