"""Binary, flat multi-class and taxonomy classification.

Multi-class columns are ``phi(x) * Gamma(y)[r]``: a base learner tensored
with one slot of the label coding. Flat coding uses class indicators; taxonomy
coding marks a class together with all of its ancestors.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import InvalidInputError, ParseError
from ..model import TaskDescriptor, WeakColumn
from .base import Proposal, StructTask, enumerate_finite, fit_weak


@dataclass(frozen=True)
class Taxonomy:
    """Rooted class tree. Node ids are 1-based; ``parents[k-1]`` is 0 for the root."""

    parents: tuple
    class_nodes: tuple

    def __post_init__(self):
        n = len(self.parents)
        roots = [v for v in range(1, n + 1) if self.parents[v - 1] == 0]
        if len(roots) != 1:
            raise InvalidInputError(f"taxonomy needs exactly one root, found {len(roots)}")
        for v in range(1, n + 1):
            p = self.parents[v - 1]
            if p < 0 or p > n or p == v:
                raise InvalidInputError(f"node {v} has invalid parent {p}")
        for v in range(1, n + 1):
            seen = set()
            while v:
                if v in seen:
                    raise InvalidInputError("taxonomy contains a cycle")
                seen.add(v)
                v = self.parents[v - 1]
        if not self.class_nodes:
            raise InvalidInputError("taxonomy has no class nodes")
        for c in self.class_nodes:
            if not 1 <= c <= n:
                raise InvalidInputError(f"class node {c} is not a taxonomy node")

    @property
    def node_count(self):
        return len(self.parents)

    @property
    def n_classes(self):
        return len(self.class_nodes)

    @property
    def root(self):
        return self.parents.index(0) + 1

    def ancestors(self, node):
        """Path from ``node`` up to the root, ``node`` included."""
        path = []
        while node:
            path.append(node)
            node = self.parents[node - 1]
        return path

    @cached_property
    def depth(self):
        return tuple(len(self.ancestors(v)) - 1 for v in range(1, self.node_count + 1))

    @cached_property
    def height(self):
        """Distance from each node to the deepest leaf below it (leaves are 0)."""
        h = [0] * self.node_count
        for v in sorted(range(1, self.node_count + 1), key=lambda v: -self.depth[v - 1]):
            p = self.parents[v - 1]
            if p:
                h[p - 1] = max(h[p - 1], h[v - 1] + 1)
        return tuple(h)

    def lca(self, a, b):
        up = set(self.ancestors(a))
        for v in self.ancestors(b):
            if v in up:
                return v
        raise InvalidInputError("nodes share no ancestor")  # unreachable for a tree

    def class_node(self, y):
        if not 1 <= y <= self.n_classes:
            raise InvalidInputError(f"class {y} outside 1..{self.n_classes}")
        return self.class_nodes[y - 1]

    @cached_property
    def coding(self):
        """Matrix whose row ``y-1`` is ``gamma_tree(y)``."""
        return np.array([gamma_tree(y, self) for y in range(1, self.n_classes + 1)])

    @cached_property
    def loss_matrix(self):
        k = self.n_classes
        return np.array([[tree_loss(a, b, self) for b in range(1, k + 1)]
                         for a in range(1, k + 1)], dtype=float)

    def to_lines(self):
        flags = set(self.class_nodes)
        return [f"{v} {self.parents[v - 1] or 'ROOT'} {1 if v in flags else 0}"
                for v in range(1, self.node_count + 1)]

    @classmethod
    def from_lines(cls, lines):
        rows = {}
        for lineno, raw in enumerate(lines, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ParseError("expected 'node_id parent_id|ROOT class_flag'", lineno)
            try:
                node = int(parts[0])
                parent = 0 if parts[1] == "ROOT" else int(parts[1])
                flag = int(parts[2])
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            if flag not in (0, 1) or node in rows:
                raise ParseError(f"bad flag or duplicate node {node}", lineno)
            rows[node] = (parent, flag)
        n = len(rows)
        if sorted(rows) != list(range(1, n + 1)):
            raise ParseError("node ids must be dense from 1")
        parents = tuple(rows[v][0] for v in range(1, n + 1))
        classes = tuple(v for v in range(1, n + 1) if rows[v][1])
        return cls(parents, classes)

    @classmethod
    def star(cls, k):
        """Root plus ``k`` leaf classes: the flat multi-class special case."""
        return cls(tuple([k + 1] * k + [0]), tuple(range(1, k + 1)))


def gamma_flat(y, k):
    if not 1 <= y <= k:
        raise InvalidInputError(f"class {y} outside 1..{k}")
    g = np.zeros(k)
    g[y - 1] = 1.0
    return g


def gamma_tree(y, tax):
    g = np.zeros(tax.node_count)
    for v in tax.ancestors(tax.class_node(y)):
        g[v - 1] = 1.0
    return g


def tree_loss(y, y2, tax):
    """Height of the lowest common ancestor of two classes (0 when equal)."""
    if y == y2:
        return 0.0
    return float(tax.height[tax.lca(tax.class_node(y), tax.class_node(y2)) - 1])


def binary_map_value(column_output, y):
    """``1/2 * y * phi(x)`` for ``y`` in {-1, +1}."""
    if y not in (-1, 1):
        raise InvalidInputError(f"binary label must be -1 or +1, got {y}")
    return 0.5 * y * column_output


def joint_map_value(column_output, slot, y, coding):
    """``phi(x) * Gamma(y)[slot]`` with ``coding`` the Gamma matrix (rows = classes)."""
    return column_output * coding[y - 1, slot - 1]


def subproblem_reduce(mu, labels, coding):
    """Signed weights ``D[i, r] = sum_y mu_(i,y) (Gamma(y_i)[r] - Gamma(y)[r])``."""
    labels = np.asarray(labels, dtype=int)
    D = np.zeros((labels.size, coding.shape[1]))
    if len(mu) == 0:
        return D
    idx = np.array([k[0] for k in mu], dtype=int)
    ys = np.array([k[1] for k in mu], dtype=int)
    vals = np.array([mu[k] for k in mu])
    np.add.at(D, idx, vals[:, None] * (coding[labels[idx] - 1] - coding[ys - 1]))
    return D


def loss_augmented_infer(w, outputs, slots, y_true, coding, loss_matrix):
    """Exhaustive ``argmax_y Delta(y_true, y) - w @ dPsi(y)`` for one sample.

    ``outputs`` are the base-learner outputs ``phi_j(x)``; ties go to the
    lowest class.
    """
    gc = coding[:, np.asarray(slots, dtype=int) - 1]
    s = gc @ (np.asarray(w) * np.asarray(outputs))
    vals = loss_matrix[y_true - 1] - s[y_true - 1] + s
    return int(np.argmax(vals)) + 1


class _FeatureTask(StructTask):
    def __init__(self, X, y):
        super().__init__()
        self.X = np.asarray(X, dtype=float)
        if self.X.ndim != 2:
            raise InvalidInputError("features must form a 2-D matrix")
        self.y = np.asarray(y)
        if self.y.shape[0] != self.X.shape[0]:
            raise InvalidInputError("features and labels disagree in length")
        self.m = self.X.shape[0]

    def _evaluate(self, learner, part):
        return learner.outputs(self.X)

    def H(self, columns):
        if not columns:
            return np.zeros((self.m, 0))
        return np.column_stack([self.outputs(c) for c in columns])


class BinaryTask(_FeatureTask):
    """LPBoost recovered: ``Psi(x, y) = y * Phi(x) / 2`` with labels in {-1, +1}."""

    def __init__(self, X, y):
        y = np.asarray(y, dtype=int)
        if not np.all(np.isin(y, (-1, 1))):
            raise InvalidInputError("binary labels must be -1 or +1")
        super().__init__(X, y)
        self.descriptor = TaskDescriptor("binary", n_classes=2, loss="zero_one")

    def initial_labels(self):
        return [int(-v) for v in self.y]

    def loss_pairs(self, idx, ys):
        return (np.asarray(ys) != self.y[idx]).astype(float)

    def delta_psi_pairs(self, columns, idx, ys):
        coef = 0.5 * (self.y[idx] - np.asarray(ys, dtype=float))
        return self.H(columns)[idx] * coef[:, None]

    def infer(self, w, columns):
        margin = self.y * (self.H(columns) @ np.asarray(w, dtype=float))
        other = 1.0 - margin
        out = np.where(other > 0, -self.y, self.y)
        out = np.where(other == 0, -1, out)
        return [int(v) for v in out]

    def enumerate_constraints(self, columns, cap=10**6):
        return enumerate_finite(self, columns, lambda i: [int(-self.y[i])], cap)

    def propose(self, mu, params):
        d = np.zeros(self.m)
        for (i, ylab), value in mu.items():
            d[i] += value * 0.5 * (self.y[i] - ylab)
        if not np.any(d != 0):
            return Proposal([], 0.0, None)
        learner, edge = fit_weak(self.X, d, params)
        col = WeakColumn(learner)
        return Proposal([col], edge, col)

    def predict(self, w, columns):
        f = self.H(columns) @ np.asarray(w, dtype=float)
        return [1 if v > 0 else -1 for v in f]


class MulticlassTask(_FeatureTask):
    """Flat or taxonomy multi-class classification over classes 1..k."""

    def __init__(self, X, y, taxonomy=None, loss=None, n_classes=None):
        y = np.asarray(y, dtype=int)
        super().__init__(X, y)
        self.taxonomy = taxonomy
        if taxonomy is None:
            k = int(n_classes or (y.max() if y.size else 2))
            self.coding = np.eye(k)
            self.descriptor = TaskDescriptor("multiclass", n_classes=k, loss=loss or "zero_one")
        else:
            k = taxonomy.n_classes
            self.coding = taxonomy.coding
            self.descriptor = TaskDescriptor("tree", n_classes=k, parents=taxonomy.parents,
                                             class_nodes=taxonomy.class_nodes,
                                             loss=loss or "tree")
        if k < 2:
            raise InvalidInputError("multi-class tasks need at least two classes")
        if y.size and (y.min() < 1 or y.max() > k):
            raise InvalidInputError(f"class labels must lie in 1..{k}")
        self.k = k
        self.loss_matrix = loss_matrix_for(self.descriptor.loss, k, taxonomy)

    @property
    def slots(self):
        return self.coding.shape[1]

    def _gc(self, columns):
        return self.coding[:, [c.class_slot - 1 for c in columns]]

    def initial_labels(self):
        return [1 if v != 1 else 2 for v in self.y]

    def loss_pairs(self, idx, ys):
        return self.loss_matrix[self.y[idx] - 1, np.asarray(ys, dtype=int) - 1]

    def delta_psi_pairs(self, columns, idx, ys):
        gc = self._gc(columns)
        ys = np.asarray(ys, dtype=int)
        return self.H(columns)[idx] * (gc[self.y[idx] - 1] - gc[ys - 1])

    def class_scores(self, w, columns):
        """``S[i, y-1] = w @ Psi(x_i, y)``."""
        return (self.H(columns) * np.asarray(w, dtype=float)) @ self._gc(columns).T

    def infer(self, w, columns):
        S = self.class_scores(w, columns)
        rows = np.arange(self.m)
        vals = self.loss_matrix[self.y - 1] - S[rows, self.y - 1][:, None] + S
        return [int(v) + 1 for v in np.argmax(vals, axis=1)]

    def enumerate_constraints(self, columns, cap=10**6):
        labels = range(1, self.k + 1)
        return enumerate_finite(
            self, columns, lambda i: [y for y in labels if y != self.y[i]], cap)

    def reduce(self, mu):
        return subproblem_reduce(mu, self.y, self.coding)

    def propose(self, mu, params):
        D = self.reduce(mu)
        best = None
        for r in range(self.slots):
            if not np.any(D[:, r] != 0):
                continue
            learner, edge = fit_weak(self.X, D[:, r], params)
            if best is None or edge > best[1]:
                best = (learner, edge, r)
        if best is None:
            return Proposal([], 0.0, None)
        learner, edge, r = best
        cols = [WeakColumn(learner, s + 1) for s in range(self.slots)]
        return Proposal(cols, edge, cols[r])

    def predict(self, w, columns):
        return [int(v) + 1 for v in np.argmax(self.class_scores(w, columns), axis=1)]


def loss_matrix_for(name, k, taxonomy=None):
    if name == "zero_one":
        return 1.0 - np.eye(k)
    if name == "tree":
        if taxonomy is None:
            raise InvalidInputError("tree loss needs a taxonomy")
        return taxonomy.loss_matrix
    if name == "zero":
        return np.zeros((k, k))
    raise InvalidInputError(f"unknown loss {name!r}")
