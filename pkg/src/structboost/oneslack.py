"""Cutting-plane solver for the 1-slack restricted master.

For a fixed set of columns this solves

    min  1@w + C*xi
    s.t. (1/m) w @ sum_i c_i dPsi_i(y'_i) >= (1/m) sum_i c_i Delta(y_i, y'_i) - xi
         for every (c, y') in the working set,  w >= 0, xi >= 0

adding the most violated aggregated constraint until the violation drops to
``eps_cp``, then recovers per-example dual weights from the LP duals.
"""

import csv
from dataclasses import dataclass, field
import logging

import numpy as np

from .errors import ConvergenceError, SolverFailure
from .lp import LinearProgram, solve
from .model import DualWeights

log = logging.getLogger(__name__)

TRACE_FIELDS = ("round", "objective", "violation_gap", "working_set_size")


@dataclass
class WorkingSetEntry:
    c: np.ndarray
    ylist: list
    loss: float
    row: np.ndarray
    idle: int = 0


class WorkingSet:
    """Aggregated constraints ``(c, y')`` kept across boosting iterations.

    Each entry caches its scaled loss and its coefficient row over the columns
    seen so far; :meth:`sync` extends the rows when columns are added.
    """

    def __init__(self):
        self.entries = []
        self._keys = set()

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @staticmethod
    def _key(c, ylist):
        return (np.asarray(c, dtype=np.int8).tobytes(),
                tuple(y if ci else None for ci, y in zip(c, ylist)))

    def _row(self, task, columns, c, ylist):
        idx = np.flatnonzero(c)
        ys = [ylist[i] for i in idx]
        if idx.size == 0:
            return 0.0, np.zeros(len(columns))
        loss = float(np.sum(task.loss_pairs(idx, ys))) / task.m
        row = task.delta_psi_pairs(columns, idx, ys).sum(axis=0) / task.m
        return loss, row

    def add(self, task, columns, c, ylist):
        """Add an entry; returns False when it is already present."""
        c = np.asarray(c, dtype=np.int8)
        key = self._key(c, ylist)
        if key in self._keys:
            return False
        loss, row = self._row(task, columns, c, ylist)
        self._keys.add(key)
        self.entries.append(WorkingSetEntry(c, list(ylist), loss, np.asarray(row, float)))
        return True

    def sync(self, task, columns):
        n = len(columns)
        for e in self.entries:
            k = e.row.size
            if k < n:
                _, extra = self._row(task, columns[k:], e.c, e.ylist)
                e.row = np.concatenate([e.row, extra])

    def evict(self, after):
        """Drop entries whose dual stayed zero for ``after`` consecutive solves."""
        kept = [e for e in self.entries if e.idle < after]
        if len(kept) != len(self.entries):
            self.entries = kept
            self._keys = {self._key(e.c, e.ylist) for e in kept}


@dataclass
class RestrictedSolution:
    w: np.ndarray
    xi: float
    lambdas: np.ndarray
    objective: float


@dataclass
class Violation:
    c: np.ndarray
    ylist: list
    losses: np.ndarray
    margins: np.ndarray

    @property
    def aggregate(self):
        """``(1/m) sum_i c_i (Delta_i - w @ dPsi_i)``: the constraint's slack demand."""
        return float(np.sum(self.c * (self.losses - self.margins))) / self.c.size


@dataclass
class CuttingPlaneResult:
    w: np.ndarray
    xi: float
    mu: DualWeights
    ws: WorkingSet
    lambdas: np.ndarray
    objective: float
    rounds: int
    gap: float
    trace: list = field(default_factory=list)


def solve_restricted(columns, ws, task, C):
    """Solve the restricted 1-slack LP over the working set."""
    n = len(columns)
    if len(ws) == 0:
        return RestrictedSolution(np.zeros(n), 0.0, np.zeros(0), 0.0)
    ws.sync(task, columns)
    A = np.array([np.append(e.row, 1.0) for e in ws])
    b = np.array([e.loss for e in ws])
    cost = np.append(np.ones(n), C)
    sol = solve(LinearProgram(cost, A, b))
    if not sol.optimal:
        raise SolverFailure(f"restricted master is {sol.status}")
    return RestrictedSolution(sol.primal[:n], float(sol.primal[n]), sol.duals,
                              sol.objective_value)


def find_violated(w, columns, task):
    """Most violated aggregated constraint at ``w``.

    ``y'_i`` maximises ``Delta(y_i, y) - w @ dPsi_i(y)``; ``c_i`` flags the
    examples where that quantity is positive.
    """
    w = np.asarray(w, dtype=float)
    ylist = task.infer(w, columns)
    losses = task.loss_vector(ylist)
    margins = task.delta_psi_rows(columns, ylist) @ w if columns else np.zeros(task.m)
    c = (losses - margins > 0).astype(np.int8)
    return Violation(c, ylist, losses, margins)


def recover_mu(ws, lambdas, m):
    """``mu_(i,y) = (1/m) sum over entries with y'_i = y of lambda * c_i``."""
    mu = DualWeights()
    for e, lam in zip(ws, lambdas):
        if lam <= 0:
            continue
        for i in np.flatnonzero(e.c):
            mu.add((int(i), e.ylist[i]), lam / m)
    return mu


def cutting_plane(task, columns, C, eps_cp, ws=None, max_rounds=1000, evict_after=10):
    """Alternate restricted solves and separation until violation <= eps_cp.

    The working set ``ws`` is extended in place and returned; an empty one is
    seeded with ``c = 1`` and the task's deterministic initial labels.
    """
    if eps_cp <= 0:
        raise ValueError("eps_cp must be positive")
    ws = WorkingSet() if ws is None else ws
    ws.sync(task, columns)
    if len(ws) == 0:
        ws.add(task, columns, np.ones(task.m, dtype=np.int8), task.cutting_plane_labels())
    trace = []
    gap = np.inf
    for rnd in range(1, max_rounds + 1):
        sol = solve_restricted(columns, ws, task, C)
        for e, lam in zip(ws, sol.lambdas):
            e.idle = e.idle + 1 if lam <= 0 else 0
        viol = find_violated(sol.w, columns, task)
        gap = viol.aggregate - sol.xi
        trace.append((rnd, sol.objective, gap, len(ws)))
        log.debug("cp_round,%d,%r,%r,%d", rnd, sol.objective, gap, len(ws))
        if gap <= eps_cp:
            break
        if not ws.add(task, columns, viol.c, viol.ylist):
            log.debug("separation returned a known constraint; gap %.3e", gap)
            break
    else:
        raise ConvergenceError(f"cutting plane did not converge in {max_rounds} rounds",
                               gap=gap)
    mu = recover_mu(ws, sol.lambdas, task.m)
    ws.evict(evict_after)
    return CuttingPlaneResult(sol.w, sol.xi, mu, ws, sol.lambdas, sol.objective, rnd, gap,
                              trace)


def write_trace(rows, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRACE_FIELDS)
    for r in rows:
        writer.writerow([r[0]] + [repr(float(v)) for v in r[1:3]] + [r[3]])
