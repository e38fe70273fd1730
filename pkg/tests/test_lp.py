import numpy as np
import pytest
import scipy.sparse as sp

from structboost.errors import InvalidInputError
from structboost.lp import LinearProgram, residuals, solve

from oracles import lp_vertex_optimum


def random_feasible_lp(rng):
    n = int(rng.integers(1, 7))
    r = int(rng.integers(1, 9))
    A = rng.normal(size=(r, n)).round(2)
    x0 = rng.uniform(0, 2, size=n)
    b = A @ x0 - rng.uniform(0, 1, size=r)
    c = rng.uniform(0.1, 2.0, size=n)
    if rng.random() < 0.3:
        # mixed-sign costs kept bounded by a budget row
        c = rng.normal(size=n)
        A = np.vstack([A, -np.ones(n)])
        b = np.append(b, -(x0.sum() + 3.0))
    return c, A, b


def test_single_lower_bound():
    sol = solve(LinearProgram([1.0], [[1.0]], [3.0]))
    assert sol.status == "optimal"
    assert sol.primal[0] == pytest.approx(3.0)
    assert sol.duals[0] == pytest.approx(1.0)
    assert sol.objective_value == pytest.approx(3.0)


def test_pivot_rule_is_deterministic_on_a_face():
    sol = solve(LinearProgram([1.0, 1.0], [[1.0, 1.0]], [1.0]))
    assert sol.objective_value == pytest.approx(1.0)
    np.testing.assert_allclose(sol.primal, [1.0, 0.0])


@pytest.mark.parametrize("seed", range(50))
def test_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    c, A, b = random_feasible_lp(rng)
    best, _ = lp_vertex_optimum(c, A, b)
    sol = solve(LinearProgram(c, A, b))
    assert sol.status == "optimal"
    assert sol.objective_value == pytest.approx(best, abs=1e-8, rel=1e-8)
    res = residuals(LinearProgram(c, A, b), sol)
    assert res["primal"] <= 1e-9
    assert res["dual"] <= 1e-9
    assert res["complementarity"] <= 1e-7


@pytest.mark.parametrize("seed", range(20))
def test_dual_route_agrees(seed):
    rng = np.random.default_rng(100 + seed)
    c, A, b = random_feasible_lp(rng)
    lp = LinearProgram(c, A, b)
    a = solve(lp)
    d = solve(lp, method="dual")
    assert d.status == "optimal"
    assert d.objective_value == pytest.approx(a.objective_value, abs=1e-8)
    res = residuals(lp, d)
    assert res["primal"] <= 1e-9 and res["dual"] <= 1e-9


def test_resolve_is_bitwise_identical(rng):
    c, A, b = random_feasible_lp(rng)
    s1 = solve(LinearProgram(c, A, b))
    s2 = solve(LinearProgram(c, A, b))
    assert s1.primal.tobytes() == s2.primal.tobytes()
    assert s1.duals.tobytes() == s2.duals.tobytes()


def test_infeasible_and_unbounded_are_statuses():
    assert solve(LinearProgram([1.0, 1.0], [[-1.0, -1.0]], [1.0])).status == "infeasible"
    assert solve(LinearProgram([-1.0, 1.0], [[1.0, -1.0]], [1.0])).status == "unbounded"
    # singleton rows that become bounds
    assert solve(LinearProgram([1.0], [[-1.0]], [1.0])).status == "infeasible"
    assert solve(LinearProgram([1.0], [[0.0]], [1.0])).status == "infeasible"


def test_upper_bounds_and_sparse_storage():
    A = sp.csr_matrix(np.array([[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]))
    lp = LinearProgram([-1.0, -2.0], A, [0.0, -3.0, -1.0])
    sol = solve(lp)
    np.testing.assert_allclose(sol.primal, [3.0, 1.0])
    # bound rows carry the duals: 1 and 2
    np.testing.assert_allclose(sol.duals, [0.0, 1.0, 2.0])


def test_degenerate_lp_terminates():
    # many redundant rows through the optimum vertex
    n = 4
    rows = [np.ones(n)] * 12 + [np.eye(n)[i] for i in range(n)]
    A = np.array(rows)
    b = np.concatenate([np.ones(12), np.zeros(n)])
    sol = solve(LinearProgram(np.ones(n), A, b))
    assert sol.objective_value == pytest.approx(1.0)


def test_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        LinearProgram([], np.zeros((0, 0)), [])
    with pytest.raises(InvalidInputError):
        LinearProgram([1.0], [[np.nan]], [0.0])


def test_dump_lists_every_row():
    text = LinearProgram([1.0, 2.0], [[1.0, 0.5]], [3.0]).dump()
    assert text.splitlines()[1] == "min 1.0 2.0"
    assert text.splitlines()[2] == "1.0 0.5 >= 3.0"
