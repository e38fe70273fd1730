"""Shared domain types: columns, models, dual weights, training parameters.

Scoring is ``F(x, y; w) = sum_j w_j psi_j(x, y)``; each task kind supplies the
joint map ``psi`` through :func:`structboost.tasks.joint_features`.
"""

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .weak import learner_from_dict

TASK_KINDS = ("binary", "multiclass", "tree", "ranking", "crf")
SOLVERS = ("one_slack", "m_slack")


@dataclass(frozen=True)
class Sample:
    id: int
    features: np.ndarray
    label: object = None


@dataclass(frozen=True)
class WeakColumn:
    """One weak structured learner: a base learner plus its slot.

    ``class_slot`` (1-based) is set for multi-class and taxonomy columns
    ``phi(x) * Gamma(y)[slot]``; ``part`` is ``"unary"`` or ``"pairwise"``
    for CRF columns.
    """

    learner: object
    class_slot: int = None
    part: str = None

    def to_dict(self):
        doc = {"learner": self.learner.to_dict()}
        if self.class_slot is not None:
            doc["class_slot"] = self.class_slot
        if self.part is not None:
            doc["part"] = self.part
        return doc

    @classmethod
    def from_dict(cls, doc):
        return cls(learner_from_dict(doc["learner"]), doc.get("class_slot"), doc.get("part"))


@dataclass(frozen=True)
class TaskDescriptor:
    kind: str
    n_classes: int = None
    # taxonomy parents, 1-based node ids; 0 marks the root
    parents: tuple = None
    class_nodes: tuple = None
    loss: str = None

    def __post_init__(self):
        if self.kind not in TASK_KINDS:
            raise InvalidInputError(f"unknown task kind {self.kind!r}")

    def to_dict(self):
        doc = {"kind": self.kind}
        for key in ("n_classes", "parents", "class_nodes", "loss"):
            value = getattr(self, key)
            if value is not None:
                doc[key] = list(value) if isinstance(value, tuple) else value
        return doc

    @classmethod
    def from_dict(cls, doc):
        return cls(
            doc["kind"],
            doc.get("n_classes"),
            tuple(doc["parents"]) if doc.get("parents") is not None else None,
            tuple(doc["class_nodes"]) if doc.get("class_nodes") is not None else None,
            doc.get("loss"),
        )


@dataclass
class StrongModel:
    columns: list
    weights: np.ndarray
    task: TaskDescriptor
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = list(self.columns)
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        if self.weights.size != len(self.columns):
            raise InvalidInputError(
                f"{self.weights.size} weights for {len(self.columns)} columns")
        if np.any(self.weights < 0):
            raise InvalidInputError("model weights must be nonnegative")

    def __len__(self):
        return len(self.columns)


class DualWeights:
    """Sparse map ``(example index, label) -> mu > 0``; zeros are dropped."""

    def __init__(self, entries=None):
        self._mu = {}
        for key, value in (entries or {}).items():
            self[key] = value

    def __setitem__(self, key, value):
        value = float(value)
        if value < 0:
            raise InvalidInputError(f"dual weight {key} is negative: {value}")
        if value > 0:
            self._mu[key] = value
        else:
            self._mu.pop(key, None)

    def __getitem__(self, key):
        return self._mu.get(key, 0.0)

    def add(self, key, value):
        self[key] = self[key] + value

    def __len__(self):
        return len(self._mu)

    def __iter__(self):
        return iter(self._mu)

    def items(self):
        return self._mu.items()

    def total(self):
        return float(sum(self._mu.values()))

    def mass_per_example(self, m):
        mass = np.zeros(m)
        for (i, _), value in self._mu.items():
            mass[i] += value
        return mass

    def by_example(self):
        groups = defaultdict(list)
        for (i, y), value in self._mu.items():
            groups[i].append((y, value))
        return groups

    def __repr__(self):
        return f"DualWeights({len(self)} entries, total={self.total():.6g})"


@dataclass
class TrainParams:
    C: float = 1.0
    max_iters: int = 200
    eps_cg: float = 1e-5
    eps_cp: float = 0.01
    seed: int = 0
    solver: str = "one_slack"
    weak: str = "stump"
    adaptive_eps_cp: bool = True
    max_cp_rounds: int = 1000
    evict_after: int = 10
    threads: int = 1

    def __post_init__(self):
        if not self.C > 0:
            raise InvalidInputError("C must be positive")
        if self.max_iters < 1:
            raise InvalidInputError("max_iters must be a positive integer")
        if not (self.eps_cg > 0 and self.eps_cp > 0):
            raise InvalidInputError("eps_cg and eps_cp must be strictly positive")
        if self.solver not in SOLVERS:
            raise InvalidInputError(f"unknown solver {self.solver!r}")
        if self.weak not in ("stump", "perceptron"):
            raise InvalidInputError(f"unknown weak learner {self.weak!r}")

    def to_dict(self):
        return dict(self.__dict__)


def score(model, x, y):
    """``w @ Psi(x, y)``; ``x`` is a feature vector, a Sample, or a SegInstance."""
    from .tasks import joint_features

    if isinstance(x, Sample):
        x = x.features
    if not model.columns:
        return 0.0
    return float(model.weights @ joint_features(model.task, model.columns, x, y))


def predict(model, x):
    """The label maximising the score; ties go to the smallest label."""
    from .tasks import predict_one

    if isinstance(x, Sample):
        x = x.features
    return predict_one(model, x)
