"""Task plug-ins and per-sample joint maps."""

import numpy as np

from ..errors import InvalidInputError
from . import crf
from .base import Proposal, StructTask
from .classification import BinaryTask, MulticlassTask, Taxonomy, loss_matrix_for
from .crf import CRFTask, SegInstance
from .ranking import PairSet, RankingTask, auc, build_pairs

__all__ = [
    "BinaryTask", "CRFTask", "MulticlassTask", "PairSet", "Proposal", "RankingTask",
    "SegInstance", "StructTask", "Taxonomy", "auc", "build_pairs", "joint_features",
    "make_task", "predict_one",
]


def taxonomy_of(descriptor):
    if descriptor.parents is None:
        return None
    return Taxonomy(tuple(descriptor.parents), tuple(descriptor.class_nodes))


def coding_of(descriptor):
    tax = taxonomy_of(descriptor)
    if tax is not None:
        return tax.coding
    return np.eye(descriptor.n_classes)


def _base_outputs(columns, x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InvalidInputError("expected a single feature vector")
    out = np.empty(len(columns))
    for j, col in enumerate(columns):
        learner = col.learner
        dim = learner.feature + 1 if hasattr(learner, "feature") else len(learner.v)
        if (hasattr(learner, "feature") and dim > x.size) or (
                hasattr(learner, "v") and dim != x.size):
            raise InvalidInputError(f"sample has {x.size} features; column {j} needs {dim}")
        out[j] = learner.outputs(x[None, :])[0]
    return out


def joint_features(descriptor, columns, x, y):
    """``Psi(x, y)`` restricted to ``columns``."""
    kind = descriptor.kind
    if kind == "crf":
        return crf.joint_features(columns, x, y)
    phi = _base_outputs(columns, x)
    if kind == "binary":
        if y not in (-1, 1):
            raise InvalidInputError(f"binary label must be -1 or +1, got {y}")
        return 0.5 * y * phi
    if kind in ("multiclass", "tree"):
        coding = coding_of(descriptor)
        if not 1 <= y <= coding.shape[0]:
            raise InvalidInputError(f"class {y} outside 1..{coding.shape[0]}")
        slots = np.array([c.class_slot for c in columns], dtype=int)
        return phi * coding[y - 1, slots - 1]
    # ranking scores do not depend on the label
    return phi


def predict_one(model, x):
    kind = model.task.kind
    if kind == "crf":
        return tuple(int(v) for v in crf.predict_labels(x, model))
    if not model.columns:
        phi = np.zeros(0)
    else:
        phi = _base_outputs(model.columns, x)
    if kind == "binary":
        return 1 if float(model.weights @ phi) > 0 else -1
    if kind in ("multiclass", "tree"):
        coding = coding_of(model.task)
        slots = np.array([c.class_slot for c in model.columns], dtype=int)
        scores = (coding[:, slots - 1] * (model.weights * phi)).sum(axis=1)
        return int(np.argmax(scores)) + 1
    return float(model.weights @ phi)


def make_task(descriptor, data):
    """Build the training/evaluation task for ``descriptor`` over ``data``.

    ``data`` is a :class:`~structboost.data.Dataset` for feature-vector tasks
    or a list of :class:`SegInstance` for CRF learning.
    """
    kind = descriptor.kind
    if kind == "crf":
        return CRFTask(data)
    if kind == "binary":
        return BinaryTask(data.X, data.y)
    if kind == "ranking":
        return RankingTask(data.X, data.y)
    tax = taxonomy_of(descriptor)
    return MulticlassTask(data.X, data.y, taxonomy=tax, loss=descriptor.loss,
                          n_classes=descriptor.n_classes)
