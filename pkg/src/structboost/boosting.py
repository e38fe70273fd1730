"""Column-generation training loop.

Each iteration picks the weak learner with the largest edge under the
current dual weights, adds it as a column, and re-solves the restricted
master (1-slack cutting plane or the m-slack reference LP).  Training stops
when no learner has edge above ``1 - eps_cg``.
"""

import csv
from dataclasses import dataclass, field
import logging
import time

import numpy as np

from .model import DualWeights, StrongModel
from .mslack import solve_mslack
from .oneslack import WorkingSet, cutting_plane

log = logging.getLogger(__name__)

TRACE_FIELDS = ("iteration", "objective", "edge", "master_time", "cumulative_time")


@dataclass
class TraceRecord:
    iteration: int
    objective: float
    edge: float
    master_time: float
    cumulative_time: float
    n_columns: int = 0
    cp_rounds: int = 0
    eps_cp: float = 0.0


@dataclass
class TrainTrace:
    records: list = field(default_factory=list)
    stop_reason: str = ""

    def __len__(self):
        return len(self.records)

    def objectives(self):
        return np.array([r.objective for r in self.records])

    def edges(self):
        return np.array([r.edge for r in self.records])

    def to_csv(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_FIELDS)
        for r in self.records:
            writer.writerow([r.iteration, repr(r.objective), repr(r.edge),
                             f"{r.master_time:.6f}", f"{r.cumulative_time:.6f}"])


@dataclass
class IterationInfo:
    """Snapshot handed to a training observer after each master solve."""

    iteration: int
    columns_before: list
    weights_before: np.ndarray
    mu_before: DualWeights
    added: list
    columns: list
    weights: np.ndarray
    mu: DualWeights
    edge: float
    objective: float
    master: object


def initial_mu(task, C):
    """Starting duals: ``C/m`` on each example's deterministic initial label.

    Examples whose initial label carries zero loss get no weight, which is the
    exact dual of the empty master in that case.
    """
    mu = DualWeights()
    labels = task.initial_labels()
    losses = task.loss_vector(labels)
    for i, (y, loss) in enumerate(zip(labels, losses)):
        if loss > 0:
            mu[(i, y)] = C / task.m
    return mu


def weak_edge(mu, column, task):
    """``sum_{i,y} mu_(i,y) dpsi_i(y)`` for one column."""
    return float(task.column_edges(mu, [column])[0])


def objective_value(task, columns, w, C):
    """Primal objective ``1@w + (C/m) sum_i max_y (Delta - w @ dPsi_i(y))``."""
    w = np.asarray(w, dtype=float)
    ylist = task.infer(w, columns)
    losses = task.loss_vector(ylist)
    margins = task.delta_psi_rows(columns, ylist) @ w if columns else np.zeros(task.m)
    hinge = np.maximum(losses - margins, 0.0)
    return float(w.sum() + C / task.m * hinge.sum())


def objective(model, task, C):
    return objective_value(task, model.columns, model.weights, C)


def decrease_bound_value(task, columns, w, new_column, alpha, C):
    """Lower bound on ``f(w) - f([w, alpha])`` when ``new_column`` enters at ``alpha``."""
    cols = list(columns) + [new_column]
    w_ext = np.append(np.asarray(w, dtype=float), alpha)
    ystar = task.infer(w_ext, cols)
    dpsi = task.delta_psi_rows([new_column], ystar)[:, 0]
    return float(-alpha + alpha * C / task.m * dpsi.sum())


def decrease_lower_bound(model, new_column, alpha, task, C):
    return decrease_bound_value(task, model.columns, model.weights, new_column, alpha, C)


def train(task, params, observer=None):
    """Train a boosted structured predictor on ``task``.

    Returns ``(StrongModel, TrainTrace)``.  ``observer`` is called with an
    :class:`IterationInfo` after every master solve.
    """
    C = params.C
    start = time.perf_counter()
    mu = initial_mu(task, C)
    columns, w = [], np.zeros(0)
    ws = WorkingSet()
    trace = TrainTrace()
    stop = "max_iters"
    tol = params.eps_cp
    for it in range(1, params.max_iters + 1):
        prop = task.propose(mu, params)
        if (prop.columns and prop.selected in columns and params.solver == "one_slack"
                and tol > params.eps_cp):
            # duals from a loose inner solve; tighten before trusting the repeat
            master = cutting_plane(task, columns, C, params.eps_cp, ws,
                                   max_rounds=params.max_cp_rounds,
                                   evict_after=params.evict_after)
            w, mu, ws, tol = master.w, master.mu, master.ws, params.eps_cp
            prop = task.propose(mu, params)
        if not prop.columns:
            stop = "no_candidate"
            break
        if prop.edge <= 1.0 - params.eps_cg:
            stop = "converged"
            break
        if prop.selected in columns:
            # the master cannot improve on a column it already holds
            log.info("weak learner repeated an existing column; stopping")
            stop = "duplicate_column"
            break
        known = set(columns)
        added = [c for c in prop.columns if c not in known]
        before = (list(columns), w, mu)
        columns = columns + added
        t0 = time.perf_counter()
        if params.solver == "m_slack":
            master = solve_mslack(task, columns, C)
            w, mu, tol, rounds = master.w, master.mu, 0.0, 0
        else:
            tol = params.eps_cp
            if params.adaptive_eps_cp:
                tol = max(tol, 0.5 * (prop.edge - 1.0))
            master = cutting_plane(task, columns, C, tol, ws,
                                   max_rounds=params.max_cp_rounds,
                                   evict_after=params.evict_after)
            w, mu, ws, rounds = master.w, master.mu, master.ws, master.rounds
        t1 = time.perf_counter()
        f = objective_value(task, columns, w, C)
        trace.records.append(TraceRecord(it, f, float(prop.edge), t1 - t0, t1 - start,
                                         len(columns), rounds, tol))
        log.info("iter %d edge %.6f objective %.6f columns %d", it, prop.edge, f,
                 len(columns))
        if observer is not None:
            observer(IterationInfo(it, before[0], before[1], before[2], added, columns, w,
                                   mu, float(prop.edge), f, master))
    trace.stop_reason = stop
    meta = {"params": params.to_dict(), "iterations": len(trace), "stop_reason": stop}
    model = StrongModel(list(columns), np.maximum(np.asarray(w, float), 0.0),
                        task.descriptor, meta)
    return model, trace
