import numpy as np
import pytest

from oracles import mslack_linprog
from problems import make_task, random_columns
from structboost.boosting import objective_value
from structboost.errors import CapacityError, ConvergenceError
from structboost.mslack import build_mslack_lp, solve_mslack
from structboost.oneslack import WorkingSet, cutting_plane, find_violated, solve_restricted
from structboost.tasks import BinaryTask, CRFTask, MulticlassTask
from structboost.tasks.crf import synth_instance

KINDS = ["binary", "multiclass", "tree", "ranking"]


def _oracle(task, columns, C):
    desc = task.descriptor
    if desc.kind == "ranking":
        pairs = list(zip(task.pairs.I.tolist(), task.pairs.J.tolist()))
        return mslack_linprog(desc, columns, task.X, None, C, None, pairs=pairs)
    loss = lambda a, b: task.loss_matrix[a - 1, b - 1] if hasattr(task, "loss_matrix") else 1.0
    return mslack_linprog(desc, columns, task.X, task.y, C, loss)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("seed", range(3))
def test_one_slack_matches_m_slack_and_oracle(kind, seed):
    rng = np.random.default_rng(seed)
    task = make_task(kind, rng, m=24)
    columns = random_columns(rng, task, 6)
    C = float(rng.choice([0.5, 3.0, 20.0]))
    ref, _ = _oracle(task, columns, C)
    ms = solve_mslack(task, columns, C)
    cp = cutting_plane(task, columns, C, 1e-10)
    assert ms.objective == pytest.approx(ref, abs=1e-6)
    assert cp.objective == pytest.approx(ref, abs=1e-6)
    # 1-slack xi is the average of the m-slack slacks at the optimum
    assert objective_value(task, columns, cp.w, C) == pytest.approx(ref, abs=1e-6)
    assert objective_value(task, columns, ms.w, C) == pytest.approx(ref, abs=1e-6)


@pytest.mark.parametrize("kind", KINDS)
def test_dual_box_and_edges(kind):
    rng = np.random.default_rng(7)
    task = make_task(kind, rng, m=24)
    columns = random_columns(rng, task, 8)
    C = 10.0
    for mu, w, lam in [(solve_mslack(task, columns, C).mu, solve_mslack(task, columns, C).w,
                        None)] + [
            (r.mu, r.w, r.lambdas) for r in [cutting_plane(task, columns, C, 1e-10)]]:
        assert np.all(mu.mass_per_example(task.m) <= C / task.m + 1e-7)
        if lam is not None:
            assert lam.sum() <= C + 1e-7
        edges = task.column_edges(mu, columns)
        assert np.all(edges <= 1 + 1e-7)
        active = w > 1e-9
        np.testing.assert_allclose(edges[active], 1.0, atol=1e-6)


def test_edge_swap_identity():
    # sum_i d_i phi(x_i) from the reduced weights equals the mu-weighted edge
    rng = np.random.default_rng(3)
    task = make_task("multiclass", rng)
    columns = random_columns(rng, task, 5)
    mu = cutting_plane(task, columns, 5.0, 1e-10).mu
    D = task.reduce(mu)
    for col in columns:
        direct = task.column_edges(mu, [col])[0]
        swapped = float(D[:, col.class_slot - 1] @ task.outputs(col))
        assert direct == pytest.approx(swapped, abs=1e-12)


def test_zero_loss_terminates_at_zero():
    rng = np.random.default_rng(0)
    X, y = rng.normal(size=(10, 2)), np.arange(10) % 3 + 1
    task = MulticlassTask(X, y, loss="zero")
    columns = random_columns(rng, task, 3)
    res = cutting_plane(task, columns, 1.0, 1e-6)
    assert res.rounds == 1
    assert np.all(res.w == 0) and res.xi == 0


def test_round_cap_raises_with_gap():
    rng = np.random.default_rng(1)
    task = make_task("multiclass", rng)
    columns = random_columns(rng, task, 6)
    with pytest.raises(ConvergenceError) as err:
        cutting_plane(task, columns, 50.0, 1e-12, max_rounds=1)
    assert err.value.gap > 1e-12


def test_working_set_sync_and_dedup():
    rng = np.random.default_rng(2)
    task = make_task("binary", rng)
    columns = random_columns(rng, task, 4)
    ws = WorkingSet()
    ylist = task.initial_labels()
    c = np.ones(task.m, dtype=np.int8)
    assert ws.add(task, columns[:2], c, ylist)
    assert not ws.add(task, columns[:2], c, ylist)
    # labels at c_i = 0 positions do not matter for identity
    c2 = c.copy()
    c2[0] = 0
    y2 = list(ylist)
    assert ws.add(task, columns[:2], c2, y2)
    y2[0] = task.y[0]
    assert not ws.add(task, columns[:2], c2, y2)
    ws.sync(task, columns)
    fresh = WorkingSet()
    fresh.add(task, columns, c, ylist)
    np.testing.assert_allclose(ws.entries[0].row, fresh.entries[0].row, atol=1e-15)


def test_violation_nonpositive_at_termination():
    rng = np.random.default_rng(4)
    task = make_task("tree", rng, m=30)
    columns = random_columns(rng, task, 6)
    res = cutting_plane(task, columns, 5.0, 1e-3)
    v = find_violated(res.w, columns, task)
    assert v.aggregate - res.xi <= 1e-3 + 1e-12
    for rnd, obj, gap, size in res.trace[:-1]:
        assert gap > 1e-3


def test_eviction_of_idle_entries():
    rng = np.random.default_rng(5)
    task = make_task("multiclass", rng)
    columns = random_columns(rng, task, 6)
    ws = None
    for _ in range(4):
        res = cutting_plane(task, columns, 5.0, 1e-8, ws, evict_after=1)
        ws = res.ws
    assert all(e.idle < 1 for e in ws)


def test_restricted_empty_working_set():
    rng = np.random.default_rng(0)
    task = make_task("binary", rng)
    sol = solve_restricted(random_columns(rng, task, 2), WorkingSet(), task, 1.0)
    assert np.all(sol.w == 0) and sol.xi == 0


def test_lpboost_matrix():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(30, 4))
    y = np.where(rng.random(30) < 0.5, -1, 1)
    task = BinaryTask(X, y)
    columns = random_columns(rng, task, 7)
    lp, keys = build_mslack_lp(task, columns, 2.0)
    H = task.H(columns)
    expected = np.hstack([y[:, None] * H, np.eye(30)])
    assert keys == [(i, int(-y[i])) for i in range(30)]
    np.testing.assert_array_equal(lp.dense_A(), expected)
    np.testing.assert_array_equal(lp.b, np.ones(30))
    np.testing.assert_array_equal(lp.c, np.r_[np.ones(7), np.full(30, 2.0 / 30)])


def test_m_slack_capacity():
    rng = np.random.default_rng(0)
    task = make_task("multiclass", rng)
    with pytest.raises(CapacityError):
        solve_mslack(task, random_columns(rng, task, 2), 1.0, cap=10)
    crf = CRFTask([synth_instance(3, 3, 0.5, 0)])
    with pytest.raises(CapacityError):
        solve_mslack(crf, [], 1.0)


def test_cutting_plane_rejects_bad_tolerance():
    rng = np.random.default_rng(0)
    task = make_task("binary", rng)
    with pytest.raises(ValueError):
        cutting_plane(task, [], 1.0, 0.0)


def test_all_zero_entry_gives_zero_solution():
    rng = np.random.default_rng(0)
    task = make_task("binary", rng, m=3)
    columns = random_columns(rng, task, 2)
    ws = WorkingSet()
    ws.add(task, columns, np.zeros(3, dtype=np.int8), task.initial_labels())
    sol = solve_restricted(columns, ws, task, 1.0)
    assert np.all(sol.w == 0) and sol.xi == 0


def test_m_slack_without_columns_saturates_the_box():
    rng = np.random.default_rng(1)
    task = make_task("tree", rng, m=12)
    ms = solve_mslack(task, [], 3.0)
    np.testing.assert_allclose(ms.xis, task.loss_matrix[task.y - 1].max(axis=1))
    np.testing.assert_allclose(ms.mu.mass_per_example(task.m), 3.0 / task.m)


def test_separating_column_needs_inverse_margin_weight():
    X = np.array([[-2.0], [-1.0], [1.0], [3.0]])
    task = BinaryTask(X, np.array([-1, -1, 1, 1]))
    from structboost.model import WeakColumn
    from structboost.weak import Stump
    ms = solve_mslack(task, [WeakColumn(Stump(0, 0.0))], 100.0)
    assert np.allclose(ms.xis, 0) and ms.w[0] == pytest.approx(1.0)


def test_find_violated_at_zero_weights():
    rng = np.random.default_rng(2)
    task = make_task("multiclass", rng)
    columns = random_columns(rng, task, 3)
    v = find_violated(np.zeros(3), columns, task)
    assert np.all(v.c == 1)
    big = find_violated(np.zeros(0), [], task)
    assert np.all(big.c == 1)
