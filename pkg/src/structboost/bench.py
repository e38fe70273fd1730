"""1-slack versus m-slack comparison on AUC maximisation."""

import csv
import dataclasses
import os
import time

import numpy as np

from .boosting import train
from .errors import CapacityError
from .io import fmt
from .tasks import RankingTask, auc

BENCH_FIELDS = ("C", "solver", "train_auc", "test_auc", "wall_time", "iterations",
                "objective")


def linear_scores(model, X):
    """``sum_j w_j phi_j(x)`` for every row of ``X``."""
    if not model.columns:
        return np.zeros(len(X))
    H = np.column_stack([c.learner.outputs(X) for c in model.columns])
    return H @ model.weights


def bench_auc(train_data, test_data, C_grid, params, pairs=None, trace_dir=None):
    """Train both masters for every ``C``; returns one row dict per (C, solver).

    A capacity failure of the m-slack master yields a row of ``-`` values.
    """
    rows = []
    for C in C_grid:
        for solver in ("one_slack", "m_slack"):
            p = dataclasses.replace(params, C=float(C), solver=solver)
            task = RankingTask(train_data.X, train_data.y, pairs)
            start = time.perf_counter()
            try:
                model, trace = train(task, p)
            except CapacityError:
                rows.append({"C": fmt(float(C)), "solver": solver,
                             **{k: "-" for k in BENCH_FIELDS[2:]}})
                continue
            elapsed = time.perf_counter() - start
            test_scores = linear_scores(model, test_data.X)
            rows.append({
                "C": fmt(float(C)), "solver": solver,
                "train_auc": auc(task.predict(model.weights, model.columns), train_data.y),
                "test_auc": auc(test_scores, test_data.y),
                "wall_time": elapsed,
                "iterations": len(trace),
                "objective": trace.objectives()[-1] if len(trace) else 0.0,
            })
            if trace_dir is not None:
                os.makedirs(trace_dir, exist_ok=True)
                name = os.path.join(trace_dir, f"trace_C{fmt(float(C))}_{solver}.csv")
                with open(name, "w", encoding="utf-8", newline="\n") as fh:
                    trace.to_csv(fh)
    return rows


def write_bench_csv(rows, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(BENCH_FIELDS)
    for r in rows:
        writer.writerow([r[k] if isinstance(r[k], str) else fmt(r[k]) for k in BENCH_FIELDS])
