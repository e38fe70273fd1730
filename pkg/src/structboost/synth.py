"""Seeded synthetic datasets for the experiments and the ``synth`` command."""

import numpy as np

from .data import Dataset
from .errors import InvalidInputError
from .tasks import Taxonomy
from .tasks.crf import synth_instance


def gaussian_classes(n, k, d, seed, spread=2.0):
    """``k`` Gaussian blobs with random centres; binary data when ``k == 2`` uses +-1."""
    if n < 1 or k < 2 or d < 1:
        raise InvalidInputError("need n >= 1, k >= 2, d >= 1")
    rng = np.random.default_rng(seed)
    centres = rng.normal(scale=spread, size=(k, d))
    y = rng.integers(0, k, n)
    X = centres[y] + rng.standard_normal((n, d))
    labels = np.where(y == 0, -1, 1) if k == 2 else y + 1
    return Dataset(X, labels)


def two_level_taxonomy():
    """Root with two super-classes of three leaf classes each."""
    return Taxonomy((7, 7, 7, 8, 8, 8, 9, 9, 0), (1, 2, 3, 4, 5, 6))


def taxonomy_data(n, seed, d=6, super_gap=2.5, leaf_gap=1.2):
    """Classes that are close inside a super-class and far across super-classes."""
    rng = np.random.default_rng(seed)
    supers = rng.normal(size=(2, d))
    supers *= super_gap / np.linalg.norm(supers[0] - supers[1])
    leaves = np.array([supers[c // 3] + leaf_gap * rng.normal(size=d) / np.sqrt(d)
                       for c in range(6)])
    y = rng.integers(0, 6, n)
    X = leaves[y] + rng.standard_normal((n, d))
    return Dataset(X, y + 1), two_level_taxonomy()


def imbalanced_ranking(n, seed, positive_fraction=0.1, d=5, shift=1.0):
    """Binary relevance labels (1 relevant) with a minority of shifted positives."""
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((n, d))
    n_pos = max(1, int(round(positive_fraction * n)))
    y = np.zeros(n, dtype=int)
    y[rng.choice(n, n_pos, replace=False)] = 1
    direction = np.linspace(1.0, 0.2, d)
    X = noise + shift * y[:, None] * direction
    return Dataset(X, y)


def crf_grids(count, width, height, noise, seed):
    return [synth_instance(width, height, noise, seed * 100003 + i) for i in range(count)]
