"""Dense bounded-variable revised simplex returning primal and dual solutions.

Problems are posed as

    minimize    c @ x
    subject to  A @ x >= b,   0 <= x <= upper

and solved by a two-phase revised simplex with an explicit basis inverse.
Pricing is Dantzig's largest reduced cost; after a run of degenerate pivots
the solver switches to Bland's smallest-index rule until progress resumes.
"""

from dataclasses import dataclass, field
import io

import numpy as np
import scipy.sparse as sp

from .errors import InvalidInputError, SolverFailure

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-11
DEGENERATE_RUN = 50
REFACTOR_EVERY = 64

_observers = []


def add_observer(fn):
    """Register ``fn(lp, solution)``, called after every :func:`solve`."""
    _observers.append(fn)


def remove_observer(fn):
    _observers.remove(fn)


@dataclass
class LinearProgram:
    c: np.ndarray
    A: object  # dense ndarray or scipy sparse matrix, shape (rows, vars)
    b: np.ndarray
    upper: np.ndarray = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        if self.c.size == 0:
            raise InvalidInputError("linear program needs at least one variable")
        if not sp.issparse(self.A):
            self.A = np.asarray(self.A, dtype=float).reshape(-1, self.c.size)
        self.b = np.asarray(self.b, dtype=float).ravel()
        if self.A.shape != (self.b.size, self.c.size):
            raise InvalidInputError(
                f"constraint matrix has shape {self.A.shape}, expected "
                f"({self.b.size}, {self.c.size})"
            )
        if self.upper is None:
            self.upper = np.full(self.c.size, np.inf)
        else:
            self.upper = np.asarray(self.upper, dtype=float).ravel()
        data = self.A.data if sp.issparse(self.A) else self.A
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.b))
                and np.all(np.isfinite(data))):
            raise InvalidInputError("linear program has non-finite coefficients")
        if np.any(self.upper < 0):
            raise InvalidInputError("negative upper bound")

    @property
    def n_vars(self):
        return self.c.size

    @property
    def n_rows(self):
        return self.b.size

    def dense_A(self):
        return self.A.toarray() if sp.issparse(self.A) else self.A

    def dual(self):
        """The LP dual, itself written as a minimization with >= rows.

        ``max b@y s.t. A.T@y <= c, y >= 0`` becomes
        ``min -b@y s.t. -A.T@y >= -c``.
        """
        if np.any(np.isfinite(self.upper)):
            raise InvalidInputError("dual() requires variables without upper bounds")
        At = -self.A.T.tocsr() if sp.issparse(self.A) else -self.A.T
        return LinearProgram(-self.b, At, -self.c)

    def dump(self):
        """Plain-text tableau: one line per row, coefficients then ``>= rhs``."""
        out = io.StringIO()
        A = self.dense_A()
        out.write(f"# lp vars={self.n_vars} rows={self.n_rows}\n")
        out.write("min " + " ".join(repr(float(v)) for v in self.c) + "\n")
        for r in range(self.n_rows):
            out.write(" ".join(repr(float(v)) for v in A[r]))
            out.write(f" >= {float(self.b[r])!r}\n")
        if np.any(np.isfinite(self.upper)):
            out.write("upper " + " ".join(repr(float(v)) for v in self.upper) + "\n")
        return out.getvalue()


@dataclass
class LpSolution:
    status: str
    primal: np.ndarray
    duals: np.ndarray
    objective_value: float
    reduced_costs: np.ndarray = field(default=None, repr=False)
    iterations: int = 0

    @property
    def optimal(self):
        return self.status == OPTIMAL


def residuals(lp, sol):
    """Feasibility and duality-gap residuals of an optimal solution.

    Returns a dict with ``primal``, ``dual``, ``gap`` (relative) and
    ``complementarity``; all should be ~0 for an optimal pair.
    """
    A = lp.A
    x, lam = sol.primal, sol.duals
    Ax = A @ x
    primal = max(
        float(np.max(lp.b - Ax, initial=0.0)),
        float(np.max(-x, initial=0.0)),
        float(np.max(x - lp.upper, initial=0.0)),
    )
    d = lp.c - A.T @ lam
    bounded = np.isfinite(lp.upper)
    # a negative reduced cost is only admissible on an upper-bounded variable
    nu = np.where(bounded, np.maximum(0.0, -d), 0.0)
    dual = max(
        float(np.max(-lam, initial=0.0)),
        float(np.max(np.where(bounded, 0.0, -d), initial=0.0)),
    )
    dual_obj = float(lp.b @ lam) - float(np.sum(np.where(bounded, lp.upper, 0.0) * nu))
    primal_obj = float(lp.c @ x)
    gap = abs(primal_obj - dual_obj) / (1.0 + abs(primal_obj))
    comp = float(np.max(np.abs(lam * (Ax - lp.b)), initial=0.0))
    return {"primal": primal, "dual": dual, "gap": gap, "complementarity": comp,
            "dual_objective": dual_obj}


def solve(lp, method="primal", max_pivots=None):
    """Solve ``lp`` to optimality.

    ``method="dual"`` builds the dual LP, solves that, and maps the result back;
    it is much cheaper when there are far more rows than structural variables
    (each primal row turns into a dual variable, and rows with a single
    nonzero turn into simple bounds).
    Infeasibility and unboundedness are reported through ``status``.
    """
    if method == "primal":
        sol = _solve_primal(lp, max_pivots)
    elif method == "dual":
        dsol = _solve_primal(lp.dual(), max_pivots)
        if dsol.status == OPTIMAL:
            x = np.maximum(dsol.duals, 0.0)
            y = np.maximum(dsol.primal, 0.0)
            d = lp.c - lp.A.T @ y
            sol = LpSolution(OPTIMAL, x, y, float(lp.c @ x), d, dsol.iterations)
        else:
            status = INFEASIBLE if dsol.status == UNBOUNDED else UNBOUNDED
            sol = _failed(status, lp.n_vars, lp.n_rows, dsol.iterations)
    else:
        raise InvalidInputError(f"unknown LP method {method!r}")
    for fn in _observers:
        fn(lp, sol)
    return sol


def _failed(status, n, r, iterations=0):
    return LpSolution(status, np.full(n, np.nan), np.full(r, np.nan), np.nan,
                      np.full(n, np.nan), iterations)


def _solve_primal(lp, max_pivots):
    n, r = lp.n_vars, lp.n_rows
    A = lp.A
    upper = lp.upper.copy()
    duals = np.zeros(r)

    # presolve: rows with at most one nonzero become bounds (or vanish)
    if sp.issparse(A):
        A = A.tocsr()
        nnz = np.diff(A.indptr)
    else:
        nnz = np.count_nonzero(A, axis=1)
    keep = np.ones(r, dtype=bool)
    bound_row = np.full(n, -1)
    bound_coef = np.zeros(n)
    for i in np.flatnonzero(nnz <= 1):
        if nnz[i] == 0:
            if lp.b[i] > FEAS_TOL:
                return _failed(INFEASIBLE, n, r)
            keep[i] = False
            continue
        if sp.issparse(A):
            j = int(A.indices[A.indptr[i]])
            a = float(A.data[A.indptr[i]])
        else:
            j = int(np.flatnonzero(A[i])[0])
            a = float(A[i, j])
        if a > 0 and lp.b[i] > 0:
            continue  # positive lower bound; leave it as a row
        keep[i] = False
        if a < 0:
            u = lp.b[i] / a
            if u < -FEAS_TOL:
                return _failed(INFEASIBLE, n, r)
            u = max(u, 0.0)
            if u < upper[j]:
                upper[j] = u
                bound_row[j] = i
                bound_coef[j] = a

    rows = np.flatnonzero(keep)
    Ak = A[rows].toarray() if sp.issparse(A) else A[rows]
    core = _Simplex(lp.c, Ak, lp.b[rows], upper, max_pivots)
    status = core.run()
    if status != OPTIMAL:
        return _failed(status, n, r, core.iterations)

    x = core.x[:n].copy()
    x = np.clip(x, 0.0, upper)
    pi = core.pi
    duals[rows] = np.maximum(pi, 0.0)
    d = lp.c - Ak.T @ pi
    for j in np.flatnonzero(bound_row >= 0):
        if x[j] >= upper[j] - FEAS_TOL and d[j] < 0:
            duals[bound_row[j]] = -d[j] / -bound_coef[j]
    return LpSolution(OPTIMAL, x, duals, float(lp.c @ x), d, core.iterations)


class _Simplex:
    """Two-phase bounded revised simplex on ``A x - s = b``.

    Column layout: structural ``x`` (n), surplus ``s`` (r), then one artificial
    per row with positive right-hand side.
    """

    def __init__(self, c, A, b, upper, max_pivots):
        r, n = A.shape
        self.n, self.r = n, r
        art_rows = np.flatnonzero(b > 0)
        na = art_rows.size
        E = np.zeros((r, na))
        E[art_rows, np.arange(na)] = 1.0
        self.M = np.hstack([A, -np.eye(r), E])
        self.b = b
        N = n + r + na
        self.N = N
        self.cost2 = np.concatenate([c, np.zeros(r + na)])
        self.cost1 = np.zeros(N)
        self.cost1[n + r:] = 1.0
        self.upper = np.concatenate([upper, np.full(r + na, np.inf)])
        self.art = np.arange(n + r, N)

        basis = n + np.arange(r)
        basis[art_rows] = n + r + np.arange(na)
        self.basis = basis
        self.at_upper = np.zeros(N, dtype=bool)
        self.is_basic = np.zeros(N, dtype=bool)
        self.is_basic[basis] = True
        self.iterations = 0
        self.max_pivots = max_pivots or 50 * (N + r) + 1000
        self._refactor()

    def _nonbasic_values(self):
        xN = np.where(self.at_upper & ~self.is_basic, self.upper, 0.0)
        xN[~np.isfinite(xN)] = 0.0
        return xN

    def _refactor(self):
        B = self.M[:, self.basis]
        if self.r:
            self.Binv = np.linalg.inv(B)
        else:
            self.Binv = np.zeros((0, 0))
        xN = self._nonbasic_values()
        rhs = self.b - self.M @ xN
        self.xB = self.Binv @ rhs
        self.since_refactor = 0

    @property
    def x(self):
        x = self._nonbasic_values()
        x[self.basis] = self.xB
        return x

    def run(self):
        if self.art.size:
            status = self._iterate(self.cost1)
            if status != OPTIMAL:
                return status
            infeas = float(np.sum(np.abs(self.x[self.art])))
            if infeas > FEAS_TOL * max(1.0, float(np.max(np.abs(self.b)))):
                return INFEASIBLE
            self.upper[self.art] = 0.0
        status = self._iterate(self.cost2)
        if status == OPTIMAL:
            self._refactor()
            cB = self.cost2[self.basis]
            self.pi = np.linalg.solve(self.M[:, self.basis].T, cB) if self.r else np.zeros(0)
        return status

    def _iterate(self, cost):
        degenerate = 0
        bland = False
        while True:
            if self.since_refactor >= REFACTOR_EVERY:
                self._refactor()
            pi = cost[self.basis] @ self.Binv if self.r else np.zeros(0)
            d = cost - pi @ self.M
            d[self.is_basic] = 0.0
            from_lower = (~self.at_upper) & (d < -OPT_TOL) & (self.upper > 0)
            from_upper = self.at_upper & (d > OPT_TOL)
            cand = (from_lower | from_upper) & ~self.is_basic
            if not cand.any():
                return OPTIMAL
            self.iterations += 1
            if self.iterations > self.max_pivots:
                raise SolverFailure(
                    f"simplex exceeded {self.max_pivots} pivots without converging")
            if bland:
                j = int(np.flatnonzero(cand)[0])
            else:
                j = int(np.argmax(np.where(cand, np.abs(d), -1.0)))
            direction = 1.0 if from_lower[j] else -1.0

            alpha = self.Binv @ self.M[:, j]
            rate = direction * alpha  # basics move by -theta * rate
            xB = self.xB
            uB = self.upper[self.basis]
            ratios = np.full(self.r, np.inf)
            dec = rate > PIVOT_TOL
            inc = rate < -PIVOT_TOL
            ratios[dec] = np.maximum(xB[dec], 0.0) / rate[dec]
            inc_fin = inc & np.isfinite(uB)
            ratios[inc_fin] = np.maximum(uB[inc_fin] - xB[inc_fin], 0.0) / -rate[inc_fin]
            theta_row = float(np.min(ratios)) if self.r else np.inf
            theta_flip = float(self.upper[j])
            if not np.isfinite(theta_row) and not np.isfinite(theta_flip):
                return UNBOUNDED

            if theta_flip <= theta_row:
                theta = theta_flip
                self.xB = xB - theta * rate
                self.at_upper[j] = not self.at_upper[j]
            else:
                theta = theta_row
                tied = np.flatnonzero(ratios <= theta_row + 1e-12 * max(1.0, theta_row))
                if bland:
                    p = int(tied[np.argmin(self.basis[tied])])
                else:
                    p = int(tied[np.argmax(np.abs(rate[tied]))])
                leaving = int(self.basis[p])
                entering_value = theta if direction > 0 else self.upper[j] - theta
                self.xB = xB - theta * rate
                self.xB[p] = entering_value
                self.at_upper[leaving] = bool(rate[p] < 0)
                self.at_upper[j] = False
                self.is_basic[leaving] = False
                self.is_basic[j] = True
                self.basis[p] = j
                row = self.Binv[p] / alpha[p]
                self.Binv -= np.outer(alpha, row)
                self.Binv[p] = row
                self.since_refactor += 1

            if theta <= 1e-12:
                degenerate += 1
                if degenerate >= DEGENERATE_RUN:
                    bland = True
            else:
                degenerate = 0
                bland = False
