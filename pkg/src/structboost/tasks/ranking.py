"""Ordinal regression / AUC maximisation over preference pairs.

Every pair ``(i, j)`` with ``label_i > label_j`` is one margin group with a
two-element label space: 0 (ranked correctly, the truth) and 1 (violated),
``Delta = 1`` on the violated label and ``dPsi = Phi(x_i) - Phi(x_j)``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from ..errors import CapacityError, InvalidInputError
from ..model import TaskDescriptor, WeakColumn
from .base import Proposal, StructTask, fit_weak


@dataclass
class PairSet:
    """Preference pairs as 0-based index arrays ``I`` (preferred) and ``J``."""

    I: np.ndarray
    J: np.ndarray

    def __len__(self):
        return self.I.size

    def tuples(self):
        """1-based ``(i, j)`` tuples."""
        return [(int(i) + 1, int(j) + 1) for i, j in zip(self.I, self.J)]


def build_pairs(labels):
    """All ordered pairs with strictly greater label, ``i`` then ``j`` ascending."""
    labels = np.asarray(labels, dtype=float)
    if np.unique(labels).size < 2:
        raise InvalidInputError("ranking needs at least two distinct label values")
    I, J = np.nonzero(labels[:, None] > labels[None, :])
    return PairSet(I.astype(int), J.astype(int))


def auc(scores, labels):
    """Fraction of positive/negative pairs ordered correctly, ties counting 1/2.

    The positive class is the larger of the two label values.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    values = np.unique(labels)
    if values.size != 2:
        raise InvalidInputError("AUC needs exactly two label classes")
    pos = labels == values[1]
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def ranking_delta_psi(column_outputs_i, column_outputs_j):
    """Per-column ``phi(x_i) - phi(x_j)``."""
    return np.asarray(column_outputs_i, float) - np.asarray(column_outputs_j, float)


def ranking_reduce(mu, pairs, n_samples):
    """Per-sample signed weights ``e_i`` from dual weights over pairs."""
    e = np.zeros(n_samples)
    if len(mu) == 0:
        return e
    p = np.array([k[0] for k in mu], dtype=int)
    vals = np.array([mu[k] for k in mu])
    np.add.at(e, pairs.I[p], vals)
    np.add.at(e, pairs.J[p], -vals)
    return e


class RankingTask(StructTask):
    def __init__(self, X, labels, pairs=None):
        super().__init__()
        self.X = np.asarray(X, dtype=float)
        self.labels = np.asarray(labels, dtype=float)
        if self.X.ndim != 2 or self.X.shape[0] != self.labels.size:
            raise InvalidInputError("features and labels disagree in length")
        self.pairs = pairs if pairs is not None else build_pairs(self.labels)
        if len(self.pairs) == 0:
            raise InvalidInputError("empty pair set")
        self.m = len(self.pairs)
        self.descriptor = TaskDescriptor("ranking", loss="pair")

    def _evaluate(self, learner, part):
        return learner.outputs(self.X)

    def H(self, columns):
        if not columns:
            return np.zeros((self.X.shape[0], 0))
        return np.column_stack([self.outputs(c) for c in columns])

    def pair_diffs(self, columns, idx=None):
        H = self.H(columns)
        I, J = self.pairs.I, self.pairs.J
        if idx is not None:
            I, J = I[idx], J[idx]
        return H[I] - H[J]

    def initial_labels(self):
        return [1] * self.m

    def loss_pairs(self, idx, ys):
        return np.asarray(ys, dtype=float)

    def delta_psi_pairs(self, columns, idx, ys):
        return self.pair_diffs(columns, idx) * np.asarray(ys, dtype=float)[:, None]

    def margins(self, w, columns):
        f = self.H(columns) @ np.asarray(w, dtype=float)
        return f[self.pairs.I] - f[self.pairs.J]

    def infer(self, w, columns):
        return (1.0 - self.margins(w, columns) > 0).astype(int).tolist()

    def most_violated_pairs(self, w, columns):
        """Indicator over pairs whose unit margin is unmet."""
        return (1.0 - self.margins(w, columns) > 0).astype(int)

    def enumerate_constraints(self, columns, cap=10**6):
        if self.m > cap:
            raise CapacityError(f"{self.m} pair constraints exceed the cap of {cap}")
        keys = [(p, 1) for p in range(self.m)]
        return keys, np.ones(self.m), self.pair_diffs(columns)

    def propose(self, mu, params):
        e = ranking_reduce(mu, self.pairs, self.X.shape[0])
        if not np.any(e != 0):
            return Proposal([], 0.0, None)
        learner, edge = fit_weak(self.X, e, params)
        col = WeakColumn(learner)
        return Proposal([col], edge, col)

    def predict(self, w, columns):
        return (self.H(columns) @ np.asarray(w, dtype=float)).tolist()
