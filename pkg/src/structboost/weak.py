"""Weak learners: decision stumps and smoothed-sign perceptrons.

Both are trained to maximise a weighted edge ``sum_i d_i * phi(x_i)`` for
signed per-example weights ``d`` supplied by a task.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

PM_ONE = "pm_one"
ZERO_ONE = "zero_one"
_RANGES = (PM_ONE, ZERO_ONE)


def _sign(z):
    # sign(0) = +1 everywhere
    return np.where(z >= 0, 1.0, -1.0)


def _to_range(s, output_range):
    return (s > 0).astype(float) if output_range == ZERO_ONE else s


@dataclass(frozen=True)
class Stump:
    feature: int
    threshold: float
    polarity: int = 1
    output_range: str = PM_ONE

    def __post_init__(self):
        if self.polarity not in (1, -1):
            raise InvalidInputError(f"stump polarity must be +1 or -1, got {self.polarity}")
        if self.output_range not in _RANGES:
            raise InvalidInputError(f"unknown output range {self.output_range!r}")

    kind = "stump"

    def outputs(self, X):
        X = np.asarray(X, dtype=float)
        x = X[..., self.feature]
        return _to_range(self.polarity * _sign(x - self.threshold), self.output_range)

    def to_dict(self):
        return {"kind": "stump", "feature": self.feature, "threshold": self.threshold,
                "polarity": self.polarity, "output_range": self.output_range}


@dataclass(frozen=True)
class Perceptron:
    v: tuple
    b: float
    sharpness: float = 5.0
    output_range: str = PM_ONE

    kind = "perceptron"

    def __post_init__(self):
        if not (np.all(np.isfinite(self.v)) and np.isfinite(self.b)):
            raise InvalidInputError("perceptron coefficients must be finite")
        if self.sharpness <= 0:
            raise InvalidInputError("sharpness must be positive")

    def outputs(self, X):
        X = np.asarray(X, dtype=float)
        return _to_range(_sign(X @ np.asarray(self.v) + self.b), self.output_range)

    def to_dict(self):
        return {"kind": "perceptron", "v": list(self.v), "b": self.b,
                "sharpness": self.sharpness, "output_range": self.output_range}


def learner_from_dict(doc):
    kind = doc.get("kind")
    if kind == "stump":
        return Stump(int(doc["feature"]), float(doc["threshold"]), int(doc["polarity"]),
                     doc.get("output_range", PM_ONE))
    if kind == "perceptron":
        return Perceptron(tuple(float(a) for a in doc["v"]), float(doc["b"]),
                          float(doc.get("sharpness", 5.0)), doc.get("output_range", PM_ONE))
    raise InvalidInputError(f"unknown weak learner kind {kind!r}")


def eval_weak(learner, x):
    """Output of ``learner`` on a single feature vector."""
    x = np.asarray(x, dtype=float)
    if isinstance(learner, Stump):
        if learner.feature >= x.shape[-1]:
            raise InvalidInputError(
                f"stump uses feature {learner.feature} but sample has {x.shape[-1]}")
    elif len(learner.v) != x.shape[-1]:
        raise InvalidInputError(
            f"perceptron expects {len(learner.v)} features, sample has {x.shape[-1]}")
    return float(learner.outputs(x[None, :])[0])


def weighted_edge(learner, X, d):
    return float(np.dot(learner.outputs(X), d))


def _feature_candidates(x, d, total, output_range):
    """Approximate edges of every (threshold, polarity) on one feature.

    Returns (thresholds, edges) with edges shaped (n_thresholds, 2) for
    polarity (+1, -1).
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ds = d[order]
    last = np.flatnonzero(np.diff(xs) > 0)  # index of last element of each group
    csum = np.cumsum(ds)
    left = np.concatenate([[0.0], csum[last], [total]])
    mids = (xs[last] + xs[last + 1]) / 2.0
    thresholds = np.concatenate([[-np.inf], mids, [np.inf]])
    if output_range == PM_ONE:
        plus = total - 2.0 * left
        edges = np.stack([plus, -plus], axis=1)
    else:
        edges = np.stack([total - left, left], axis=1)
    return thresholds, edges


def train_stump(X, d, output_range=PM_ONE, threads=1):
    """Exact weighted-edge maximising stump.

    Scans every feature, every midpoint between sorted distinct values plus
    +/-inf, and both polarities. Ties go to the lowest feature, then the lowest
    threshold, then polarity +1. Returns ``(stump, edge)`` where ``edge`` is
    ``np.dot(stump.outputs(X), d)``.
    """
    X = np.asarray(X, dtype=float)
    d = np.asarray(d, dtype=float)
    if X.ndim != 2 or X.shape[0] != d.size:
        raise InvalidInputError("features must be an (m, dim) matrix matching the weights")
    if not np.any(d != 0):
        raise InvalidInputError("stump training needs at least one nonzero weight")
    if output_range not in _RANGES:
        raise InvalidInputError(f"unknown output range {output_range!r}")
    total = float(d.sum())

    def scan(f):
        return _feature_candidates(X[:, f], d, total, output_range)

    feats = range(X.shape[1])
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(scan, feats))
    else:
        results = [scan(f) for f in feats]

    best_approx = max(float(np.max(e)) for _, e in results)
    slack = 1e-9 * (float(np.abs(d).sum()) + 1.0)
    best = None
    for f, (thresholds, edges) in enumerate(results):
        for ti, pi in zip(*np.nonzero(edges >= best_approx - slack)):
            stump = Stump(f, float(thresholds[ti]), 1 if pi == 0 else -1, output_range)
            edge = weighted_edge(stump, X, d)
            if best is None or edge > best[1]:
                best = (stump, edge)
    return best


def stump_as_perceptron(stump, dim, scale=1.0, sharpness=5.0):
    """A perceptron with the same decision function as ``stump`` on data off the threshold."""
    v = np.zeros(dim)
    if np.isfinite(stump.threshold):
        v[stump.feature] = stump.polarity * scale
        b = -stump.threshold * stump.polarity * scale
    else:
        b = float(stump.polarity) if stump.threshold < 0 else -float(stump.polarity)
    return Perceptron(tuple(float(a) for a in v), float(b), sharpness, stump.output_range)


def smoothed_edge(v, b, X, d, sharpness, output_range=PM_ONE):
    t = np.tanh(sharpness * (X @ v + b))
    if output_range == ZERO_ONE:
        t = 0.5 * (1.0 + t)
    return float(np.dot(t, d))


def smoothed_edge_grad(v, b, X, d, sharpness, output_range=PM_ONE):
    t = np.tanh(sharpness * (X @ v + b))
    g = d * sharpness * (1.0 - t * t)
    if output_range == ZERO_ONE:
        g = 0.5 * g
    return X.T @ g, float(g.sum())


def train_perceptron(X, d, init=None, sharpness=5.0, max_steps=200, output_range=PM_ONE):
    """Gradient ascent on the tanh-smoothed edge, started from a stump.

    The hard-sign edge of the returned perceptron is never below the
    initialising stump's edge. Returns ``(perceptron, edge)``.
    """
    X = np.asarray(X, dtype=float)
    d = np.asarray(d, dtype=float)
    if init is None:
        init, _ = train_stump(X, d, output_range)
    spread = float(np.std(X[:, init.feature])) if X.shape[0] else 1.0
    start = stump_as_perceptron(init, X.shape[1], 1.0 / spread if spread > 0 else 1.0,
                                sharpness)
    v = np.asarray(start.v, dtype=float)
    b = start.b
    best = (start, weighted_edge(start, X, d))
    f = smoothed_edge(v, b, X, d, sharpness, output_range)
    step = 1.0
    for _ in range(max_steps):
        gv, gb = smoothed_edge_grad(v, b, X, d, sharpness, output_range)
        gnorm2 = float(gv @ gv + gb * gb)
        if gnorm2 < 1e-24:
            break
        # backtracking line search with an Armijo condition
        while step > 1e-12:
            v_new = v + step * gv
            b_new = b + step * gb
            f_new = smoothed_edge(v_new, b_new, X, d, sharpness, output_range)
            if f_new >= f + 1e-4 * step * gnorm2:
                break
            step *= 0.5
        else:
            break
        v, b, f = v_new, b_new, f_new
        step *= 2.0
        cand = Perceptron(tuple(float(a) for a in v), float(b), sharpness, output_range)
        edge = weighted_edge(cand, X, d)
        if edge > best[1]:
            best = (cand, edge)
    return best
