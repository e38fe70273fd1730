"""CRF parameter learning for binary segmentation over super-pixel graphs.

Unary columns apply a weak learner to the per-label unary feature vector
``U(y_p, x)``; pairwise columns apply a {0,1} learner to the edge features
``V`` and fire only where the two endpoint labels disagree. The joint map is
the negated stack of potential sums, so ``w @ Psi(x, y) == -E(x, y; w)`` with
``w >= 0``; together with {0,1} pairwise outputs this keeps every learned
energy submodular.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError, SubmodularityError
from ..graphcut import minimize_energy
from ..model import TaskDescriptor, WeakColumn
from ..weak import PM_ONE, ZERO_ONE
from .base import Proposal, StructTask, fit_weak

UNARY = "unary"
PAIRWISE = "pairwise"
FORMAT_VERSION = 1


@dataclass(eq=False)
class SegInstance:
    unary_feats: np.ndarray  # (nodes, 2, unary_dim)
    edges: np.ndarray  # (n_edges, 2), p < q
    pair_feats: np.ndarray  # (n_edges, pair_dim), all >= 0
    truth: np.ndarray  # (nodes,) in {0, 1}
    shape: tuple = None  # (height, width) for grid instances

    def __post_init__(self):
        self.unary_feats = np.asarray(self.unary_feats, dtype=float)
        self.edges = np.asarray(self.edges, dtype=int).reshape(-1, 2)
        pf = np.asarray(self.pair_feats, dtype=float)
        if len(self.edges) == 0:
            self.pair_feats = pf.reshape(0, pf.shape[-1] if pf.ndim == 2 else 0)
        else:
            self.pair_feats = pf.reshape(len(self.edges), -1)
        self.truth = np.asarray(self.truth, dtype=int)
        n = self.node_count
        if self.unary_feats.ndim != 3 or self.unary_feats.shape[1] != 2:
            raise InvalidInputError("unary features must be shaped (nodes, 2, dim)")
        if self.truth.shape != (n,) or not np.all(np.isin(self.truth, (0, 1))):
            raise InvalidInputError("truth must be a 0/1 labeling over the nodes")
        if np.any(self.pair_feats < 0):
            raise InvalidInputError("pairwise features must be nonnegative")
        if self.edges.size:
            p, q = self.edges[:, 0], self.edges[:, 1]
            if np.any(p >= q) or np.any(p < 0) or np.any(q >= n):
                raise InvalidInputError("edges must satisfy 0 <= p < q < nodes")
            if len({(a, b) for a, b in self.edges.tolist()}) != len(self.edges):
                raise InvalidInputError("duplicate edges")

    @property
    def node_count(self):
        return self.unary_feats.shape[0]

    def disagree(self, y):
        y = np.asarray(y)
        return (y[self.edges[:, 0]] != y[self.edges[:, 1]]).astype(float)

    def to_dict(self):
        doc = {
            "format_version": FORMAT_VERSION,
            "node_count": self.node_count,
            "edges": self.edges.tolist(),
            "unary_feats": self.unary_feats.tolist(),
            "pair_feats": self.pair_feats.tolist(),
            "truth": self.truth.tolist(),
        }
        if self.shape is not None:
            doc["shape"] = list(self.shape)
        return doc

    @classmethod
    def from_dict(cls, doc):
        if doc.get("format_version") != FORMAT_VERSION:
            raise InvalidInputError(
                f"unsupported seg-instance format version {doc.get('format_version')!r}")
        inst = cls(
            np.array(doc["unary_feats"], dtype=float),
            np.array(doc["edges"], dtype=int),
            np.array(doc["pair_feats"], dtype=float),
            np.array(doc["truth"], dtype=int),
            tuple(doc["shape"]) if doc.get("shape") else None,
        )
        if inst.node_count != doc["node_count"]:
            raise InvalidInputError("node_count does not match the unary features")
        return inst


def hamming(y, y2):
    y, y2 = np.asarray(y), np.asarray(y2)
    if y.shape != y2.shape:
        raise InvalidInputError("labelings differ in length")
    return int(np.sum(y != y2))


def potentials(inst, columns, weights):
    """Per-node unary costs ``(u0, u1)`` and per-edge disagreement cost ``theta``."""
    n = inst.node_count
    u = np.zeros((n, 2))
    theta = np.zeros(len(inst.edges))
    flat = inst.unary_feats.reshape(n * 2, -1)
    for col, wj in zip(columns, weights):
        if wj == 0:
            continue
        if col.part == UNARY:
            u += wj * col.learner.outputs(flat).reshape(n, 2)
        elif col.part == PAIRWISE:
            theta += wj * col.learner.outputs(inst.pair_feats)
        else:
            raise InvalidInputError("CRF columns need part 'unary' or 'pairwise'")
    return u[:, 0], u[:, 1], theta


def energy(inst, y, model):
    y = np.asarray(y, dtype=int)
    if y.shape != (inst.node_count,):
        raise InvalidInputError("labeling length does not match the instance")
    u0, u1, theta = potentials(inst, model.columns, model.weights)
    return float(np.sum(np.where(y == 1, u1, u0)) + np.sum(theta * inst.disagree(y)))


def joint_features(columns, inst, y):
    """``Psi(x, y)``: negated per-column potential sums."""
    y = np.asarray(y, dtype=int)
    n = inst.node_count
    flat = inst.unary_feats.reshape(n * 2, -1)
    dis = inst.disagree(y)
    out = np.zeros(len(columns))
    for j, col in enumerate(columns):
        if col.part == UNARY:
            out[j] = -np.sum(col.learner.outputs(flat).reshape(n, 2)[np.arange(n), y])
        else:
            out[j] = -np.sum(col.learner.outputs(inst.pair_feats) * dis)
    return out


def submodularity_check(model):
    for col, wj in zip(model.columns, model.weights):
        if col.part == PAIRWISE and (col.learner.output_range != ZERO_ONE or wj < 0):
            return False
    return True


def _minimize(inst, u0, u1, theta):
    labeling, _ = minimize_energy(u0, u1, inst.edges, theta, theta)
    return labeling


def predict_labels(inst, model):
    """Minimum-energy labeling by graph cut."""
    if not submodularity_check(model):
        raise SubmodularityError("model has non-submodular pairwise terms")
    return _minimize(inst, *potentials(inst, model.columns, model.weights))


def loss_augmented_infer(inst, model, truth=None):
    """``argmin_y E(y) - Hamming(truth, y)``, the loss folded into the unaries."""
    if not submodularity_check(model):
        raise SubmodularityError("model has non-submodular pairwise terms")
    truth = inst.truth if truth is None else np.asarray(truth, dtype=int)
    u0, u1, theta = potentials(inst, model.columns, model.weights)
    return _minimize(inst, u0 - (truth == 1), u1 - (truth == 0), theta)


def subproblem_reduce(mu, instances):
    """Signed row weights for the unary and pairwise weak-learner problems.

    Returns ``(unary_weights, pair_weights)`` shaped like the stacked unary rows
    ``(total_nodes, 2)`` and stacked edges ``(total_edges,)``; a unary row
    ``U(l, x_p)`` gains ``+mu`` when the violating labeling puts ``l`` on ``p``
    and ``-mu`` when the truth does.
    """
    node_off = np.concatenate([[0], np.cumsum([x.node_count for x in instances])])
    edge_off = np.concatenate([[0], np.cumsum([len(x.edges) for x in instances])])
    wu = np.zeros((node_off[-1], 2))
    we = np.zeros(edge_off[-1])
    for (i, y), value in mu.items():
        inst = instances[i]
        y = np.asarray(y, dtype=int)
        t = inst.truth
        nodes = np.flatnonzero(y != t)
        np.add.at(wu, (node_off[i] + nodes, y[nodes]), value)
        np.add.at(wu, (node_off[i] + nodes, t[nodes]), -value)
        we[edge_off[i]:edge_off[i + 1]] += value * (inst.disagree(y) - inst.disagree(t))
    return wu, we


def synth_instance(width, height, noise, seed):
    """A noisy grid with a rectangular foreground.

    Unary features per label are signed noisy evidence scores (low for the
    label the evidence supports); pairwise features are a contrast term
    ``exp(-|evidence difference|)`` and a constant boundary length of 1.
    """
    if width < 1 or height < 1:
        raise InvalidInputError("grid width and height must be at least 1")
    rng = np.random.default_rng(seed)
    x0, x1 = sorted(rng.choice(width + 1, size=2, replace=False)) if width > 1 else (0, 1)
    y0, y1 = sorted(rng.choice(height + 1, size=2, replace=False)) if height > 1 else (0, 1)
    truth = np.zeros((height, width), dtype=int)
    truth[y0:y1, x0:x1] = 1
    truth = truth.ravel()
    n = width * height
    sign = 2.0 * truth - 1.0
    ev1 = sign + noise * rng.standard_normal(n)
    ev2 = 0.5 * sign + noise * rng.standard_normal(n)
    evidence = np.stack([ev1, ev2], axis=1)
    # label 0 costs +evidence, label 1 costs -evidence
    unary = np.stack([evidence, -evidence], axis=1)
    edges = []
    for r in range(height):
        for c in range(width):
            p = r * width + c
            if c + 1 < width:
                edges.append((p, p + 1))
            if r + 1 < height:
                edges.append((p, p + width))
    edges = np.array(edges, dtype=int).reshape(-1, 2)
    if len(edges):
        contrast = np.exp(-np.abs(ev1[edges[:, 0]] - ev1[edges[:, 1]]))
        pair = np.stack([contrast, np.ones(len(edges))], axis=1)
    else:
        pair = np.zeros((0, 2))
    return SegInstance(unary, edges, pair, truth, (height, width))


class CRFTask(StructTask):
    def __init__(self, instances):
        super().__init__()
        self.instances = list(instances)
        if not self.instances:
            raise InvalidInputError("CRF task needs at least one instance")
        self.m = len(self.instances)
        dims = {x.unary_feats.shape[2] for x in self.instances}
        pdims = {x.pair_feats.shape[1] for x in self.instances if len(x.edges)}
        if len(dims) != 1 or len(pdims) > 1:
            raise InvalidInputError("feature dimensions differ between instances")
        self.node_off = np.concatenate([[0], np.cumsum([x.node_count for x in self.instances])])
        self.edge_off = np.concatenate([[0], np.cumsum([len(x.edges) for x in self.instances])])
        self.U = np.concatenate([x.unary_feats for x in self.instances]).reshape(
            self.node_off[-1] * 2, -1)
        pdim = pdims.pop() if pdims else 0
        self.V = np.concatenate([x.pair_feats.reshape(-1, pdim) for x in self.instances])
        self.descriptor = TaskDescriptor("crf", loss="hamming")

    def _evaluate(self, learner, part):
        if part == UNARY:
            return learner.outputs(self.U).reshape(-1, 2)
        return learner.outputs(self.V)

    def _psi(self, columns, i, y):
        inst = self.instances[i]
        y = np.asarray(y, dtype=int)
        a, b = self.node_off[i], self.node_off[i + 1]
        ea, eb = self.edge_off[i], self.edge_off[i + 1]
        dis = inst.disagree(y)
        out = np.zeros(len(columns))
        nodes = np.arange(b - a)
        for j, col in enumerate(columns):
            o = self.outputs(col)
            if col.part == UNARY:
                out[j] = -np.sum(o[a:b][nodes, y])
            else:
                out[j] = -np.sum(o[ea:eb] * dis)
        return out

    def initial_labels(self):
        return [tuple(int(v) for v in 1 - x.truth) for x in self.instances]

    def cutting_plane_labels(self):
        labels = []
        for x in self.instances:
            zeros = np.zeros(x.node_count, dtype=int)
            y = zeros if np.any(x.truth != 0) else zeros + 1
            labels.append(tuple(int(v) for v in y))
        return labels

    def loss_pairs(self, idx, ys):
        return np.array([hamming(self.instances[i].truth, y) for i, y in zip(idx, ys)],
                        dtype=float)

    def delta_psi_pairs(self, columns, idx, ys):
        rows = np.zeros((len(idx), len(columns)))
        for r, (i, y) in enumerate(zip(idx, ys)):
            rows[r] = self._psi(columns, i, self.instances[i].truth) - self._psi(columns, i, y)
        return rows

    def _potentials(self, w, columns, i):
        a, b = self.node_off[i], self.node_off[i + 1]
        ea, eb = self.edge_off[i], self.edge_off[i + 1]
        u = np.zeros((b - a, 2))
        theta = np.zeros(eb - ea)
        for col, wj in zip(columns, w):
            if wj == 0:
                continue
            if col.part == UNARY:
                u += wj * self.outputs(col)[a:b]
            else:
                if wj < 0 or col.learner.output_range != ZERO_ONE:
                    raise SubmodularityError("pairwise terms must be {0,1} with w >= 0")
                theta += wj * self.outputs(col)[ea:eb]
        return u[:, 0], u[:, 1], theta

    def infer(self, w, columns):
        out = []
        for i, inst in enumerate(self.instances):
            u0, u1, theta = self._potentials(w, columns, i)
            t = inst.truth
            y = _minimize(inst, u0 - (t == 1), u1 - (t == 0), theta)
            out.append(tuple(int(v) for v in y))
        return out

    def propose(self, mu, params):
        wu, we = subproblem_reduce(mu, self.instances)
        wu = wu.ravel()
        cols, edges = [], []
        for part, rows, d, rng in ((UNARY, self.U, wu, PM_ONE),
                                   (PAIRWISE, self.V, we, ZERO_ONE)):
            keep = np.flatnonzero(d != 0)
            if keep.size == 0:
                continue
            learner, edge = fit_weak(rows[keep], d[keep], params, rng)
            cols.append(WeakColumn(learner, part=part))
            edges.append(edge)
        if not cols:
            return Proposal([], 0.0, None)
        best = int(np.argmax(edges))
        return Proposal(cols, edges[best], cols[best])

    def predict(self, w, columns):
        out = []
        for i, inst in enumerate(self.instances):
            out.append(_minimize(inst, *self._potentials(w, columns, i)))
        return out
