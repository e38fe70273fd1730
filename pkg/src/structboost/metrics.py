"""Evaluation metrics per task kind."""

import numpy as np

from .errors import InvalidInputError
from .tasks import auc, make_task, taxonomy_of
from .tasks.classification import tree_loss


def error_rate(pred, truth):
    pred, truth = np.asarray(pred), np.asarray(truth)
    if pred.shape != truth.shape:
        raise InvalidInputError("predictions and labels differ in length")
    return float(np.mean(pred != truth)) if truth.size else 0.0


def mean_tree_loss(pred, truth, taxonomy):
    if len(pred) == 0:
        return 0.0
    return float(np.mean([tree_loss(int(a), int(b), taxonomy) for a, b in zip(truth, pred)]))


def pair_accuracy(scores, labels):
    """Fraction of strictly ordered label pairs whose scores agree; ties count 1/2."""
    scores, labels = np.asarray(scores, float), np.asarray(labels, float)
    I, J = np.nonzero(labels[:, None] > labels[None, :])
    if I.size == 0:
        raise InvalidInputError("ranking evaluation needs two distinct label values")
    d = scores[I] - scores[J]
    return float((np.sum(d > 0) + 0.5 * np.sum(d == 0)) / I.size)


def segmentation_scores(preds, truths):
    """Hamming rate, foreground/background intersection-over-union, pixel accuracy.

    Counts are pooled over all pixels of all images; an empty union scores 1.
    """
    p = np.concatenate([np.asarray(a, int).ravel() for a in preds]) if preds else np.zeros(0)
    t = np.concatenate([np.asarray(a, int).ravel() for a in truths]) if truths else np.zeros(0)
    if p.shape != t.shape:
        raise InvalidInputError("predicted and true labelings differ in size")

    def iu(label):
        inter = np.sum((p == label) & (t == label))
        union = np.sum((p == label) | (t == label))
        return float(inter / union) if union else 1.0

    acc = float(np.mean(p == t)) if t.size else 1.0
    return {"hamming_rate": 1.0 - acc, "iu_foreground": iu(1), "iu_background": iu(0),
            "pixel_accuracy": acc}


def evaluate(model, data):
    """Task-appropriate metric record for ``model`` on labelled ``data``."""
    kind = model.task.kind
    task = make_task(model.task, data)
    pred = task.predict(model.weights, model.columns)
    if kind == "crf":
        return segmentation_scores(pred, [x.truth for x in data])
    if kind == "ranking":
        labels = np.asarray(data.y)
        if np.unique(labels).size == 2:
            return {"auc": auc(pred, labels)}
        return {"pair_accuracy": pair_accuracy(pred, labels)}
    record = {"error_rate": error_rate(pred, data.y)}
    if kind == "tree":
        record["tree_loss"] = mean_tree_loss(pred, data.y, taxonomy_of(model.task))
    return record
