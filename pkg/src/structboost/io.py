"""File formats: libsvm datasets, taxonomies, segmentation instances, models.

Floats are written as shortest round-trip decimals (``repr``); non-finite
values in JSON documents are stored as the strings ``"inf"``/``"-inf"``.
"""

import json
import math

import numpy as np

from .data import Dataset
from .errors import InvalidInputError, ParseError
from .model import StrongModel, TaskDescriptor, WeakColumn
from .tasks import SegInstance, Taxonomy

MODEL_FORMAT_VERSION = 1
SEG_FORMAT_VERSION = 1


def fmt(value):
    """Shortest round-trip text for a number; integral labels print as ints."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _open_text(path_or_file, mode="r"):
    if hasattr(path_or_file, "read") or hasattr(path_or_file, "write"):
        return path_or_file, False
    return open(path_or_file, mode, encoding="utf-8", newline="\n"), True


# -- libsvm -------------------------------------------------------------------

def parse_libsvm_lines(lines, n_features=None):
    labels, rows = [], []
    width = 0
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            label = float(parts[0])
        except ValueError:
            raise ParseError(f"bad label {parts[0]!r}", lineno) from None
        feats = {}
        for tok in parts[1:]:
            idx, sep, val = tok.partition(":")
            if not sep:
                raise ParseError(f"expected index:value, got {tok!r}", lineno)
            try:
                j, v = int(idx), float(val)
            except ValueError:
                raise ParseError(f"bad feature {tok!r}", lineno) from None
            if j < 1:
                raise ParseError(f"feature index {j} must be >= 1", lineno)
            if j in feats:
                raise ParseError(f"feature {j} repeated", lineno)
            feats[j] = v
            width = max(width, j)
        labels.append(label)
        rows.append(feats)
    if n_features is not None:
        if width > n_features:
            raise InvalidInputError(f"data uses feature {width} but only {n_features} expected")
        width = n_features
    X = np.zeros((len(rows), width))
    for i, feats in enumerate(rows):
        for j, v in feats.items():
            X[i, j - 1] = v
    y = np.array(labels)
    if y.size and np.all(y == np.round(y)):
        y = y.astype(int)
    return Dataset(X, y)


def parse_libsvm(path, n_features=None):
    """Read ``label idx:val ...`` lines; indices are 1-based, missing entries 0."""
    fh, close = _open_text(path)
    try:
        return parse_libsvm_lines(fh, n_features)
    finally:
        if close:
            fh.close()


def write_libsvm(data, path):
    fh, close = _open_text(path, "w")
    try:
        for x, label in zip(data.X, data.y):
            toks = [fmt(label.item() if hasattr(label, "item") else label)]
            toks += [f"{j + 1}:{fmt(v)}" for j, v in enumerate(x) if v != 0]
            fh.write(" ".join(toks) + "\n")
    finally:
        if close:
            fh.close()


# -- taxonomy -----------------------------------------------------------------

def read_taxonomy(path):
    fh, close = _open_text(path)
    try:
        return Taxonomy.from_lines(fh)
    finally:
        if close:
            fh.close()


def write_taxonomy(tax, path):
    fh, close = _open_text(path, "w")
    try:
        fh.write("\n".join(tax.to_lines()) + "\n")
    finally:
        if close:
            fh.close()


# -- JSON documents -------------------------------------------------------------

def _encode(obj):
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            raise InvalidInputError("cannot serialise NaN")
        return v
    return obj


def dumps(doc):
    return json.dumps(_encode(doc), indent=1, sort_keys=True, allow_nan=False) + "\n"


def _load_json(path):
    fh, close = _open_text(path)
    try:
        return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    finally:
        if close:
            fh.close()


def _write(path, text):
    fh, close = _open_text(path, "w")
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


def model_to_dict(model):
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "task": model.task.to_dict(),
        "columns": [c.to_dict() for c in model.columns],
        "weights": [float(v) for v in model.weights],
        "metadata": model.metadata,
    }


def model_from_dict(doc):
    if not isinstance(doc, dict) or doc.get("format_version") != MODEL_FORMAT_VERSION:
        version = doc.get("format_version") if isinstance(doc, dict) else None
        raise InvalidInputError(f"unsupported model format version {version!r}")
    try:
        return StrongModel(
            [WeakColumn.from_dict(c) for c in doc["columns"]],
            np.array([float(v) for v in doc["weights"]]),
            TaskDescriptor.from_dict(doc["task"]),
            doc.get("metadata", {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInputError):
            raise
        raise InvalidInputError(f"malformed model document: {exc}") from None


def save_model(model, path):
    _write(path, dumps(model_to_dict(model)))


def load_model(path):
    return model_from_dict(_load_json(path))


def save_instances(instances, path):
    doc = {"format_version": SEG_FORMAT_VERSION,
           "instances": [inst.to_dict() for inst in instances]}
    _write(path, dumps(doc))


def load_instances(path):
    doc = _load_json(path)
    if not isinstance(doc, dict) or doc.get("format_version") != SEG_FORMAT_VERSION:
        version = doc.get("format_version") if isinstance(doc, dict) else None
        raise InvalidInputError(f"unsupported seg-instance format version {version!r}")
    try:
        return [SegInstance.from_dict(d) for d in doc["instances"]]
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed seg-instance document: {exc}") from None
