"""Feature datasets and seeded splitting."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .model import Sample


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y)
        if self.X.ndim != 2:
            raise InvalidInputError("features must form a 2-D array")
        if self.X.shape[0] != self.y.shape[0]:
            raise InvalidInputError(
                f"{self.X.shape[0]} feature rows but {self.y.shape[0]} labels")

    def __len__(self):
        return self.X.shape[0]

    def samples(self):
        return [Sample(i, self.X[i], self.y[i].item()) for i in range(len(self))]

    def subset(self, idx):
        return Dataset(self.X[idx], self.y[idx])


def split_dataset(data, fractions, seed):
    """Shuffle with ``seed`` and cut into contiguous parts of the given fractions."""
    fractions = np.asarray(fractions, dtype=float)
    if fractions.size == 0 or np.any(fractions < 0) or abs(fractions.sum() - 1.0) > 1e-9:
        raise InvalidInputError("split fractions must be nonnegative and sum to 1")
    n = len(data)
    order = np.random.default_rng(seed).permutation(n)
    bounds = np.round(np.cumsum(fractions) * n).astype(int)
    bounds[-1] = n
    parts, lo = [], 0
    for hi in bounds:
        parts.append(data.subset(order[lo:hi]))
        lo = hi
    return parts
