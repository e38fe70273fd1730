import numpy as np
import pytest

from structboost import cli
from structboost import io as sio


@pytest.fixture
def one_thread(monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "1")


def test_train_predict_eval_binary(tmp_path, one_thread, capsys):
    data = tmp_path / "bin.svm"
    assert cli.main(["synth", "--task", "binary", "--n", "60", "--out", str(data)]) == 0
    model = tmp_path / "m.json"
    trace = tmp_path / "t.csv"
    assert cli.main(["train", "--task", "binary", "--data", str(data), "--c", "5",
                     "--iters", "10", "--out", str(model), "--trace", str(trace)]) == 0
    assert trace.read_text().startswith("iteration,objective,edge,master_time")
    assert cli.main(["predict", "--model", str(model), "--data", str(data)]) == 0
    preds = capsys.readouterr().out.split()
    assert len(preds) == 60 and set(preds) <= {"1", "-1"}
    out = tmp_path / "e.csv"
    assert cli.main(["eval", "--model", str(model), "--data", str(data), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "metric,value" and lines[1].startswith("error_rate,")


def test_ranking_and_bench(tmp_path, one_thread):
    data = tmp_path / "r.svm"
    assert cli.main(["synth", "--task", "ranking", "--n", "40", "--positive-fraction", "0.3",
                     "--out", str(data)]) == 0
    out = tmp_path / "bench.csv"
    assert cli.main(["bench-auc", "--data", str(data), "--c-grid", "1,10", "--iters", "5",
                     "--out", str(out), "--trace-dir", str(tmp_path / "traces")]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "C,solver,train_auc,test_auc,wall_time,iterations,objective"
    assert len(rows) == 5
    traces = sorted(p.name for p in (tmp_path / "traces").iterdir())
    assert "trace_C1.0_one_slack.csv" in traces
    model = tmp_path / "m.json"
    assert cli.main(["train", "--task", "ranking", "--data", str(data), "--iters", "5",
                     "--solver", "m-slack", "--out", str(model)]) == 0
    ev = tmp_path / "ev.csv"
    assert cli.main(["eval", "--model", str(model), "--data", str(data), "--out", str(ev)]) == 0
    assert ev.read_text().splitlines()[1].startswith("auc,")


def test_exit_codes(tmp_path, one_thread):
    bad = tmp_path / "bad.svm"
    bad.write_text("1 1:1\n1 oops\n")
    assert cli.main(["train", "--task", "binary", "--data", str(bad),
                     "--out", str(tmp_path / "m.json")]) == 2
    assert cli.main(["train", "--task", "binary", "--data", str(tmp_path / "missing"),
                     "--out", str(tmp_path / "m.json")]) == 2
    seg = tmp_path / "seg.json"
    assert cli.main(["synth", "--task", "crf", "--count", "2", "--width", "3", "--height",
                     "3", "--out", str(seg)]) == 0
    assert cli.main(["train", "--task", "crf", "--data", str(seg), "--solver", "m-slack",
                     "--out", str(tmp_path / "m.json")]) == 4
    tree = tmp_path / "tree.svm"
    assert cli.main(["synth", "--task", "tree", "--n", "30", "--out", str(tree)]) == 0
    assert cli.main(["train", "--task", "tree", "--data", str(tree),
                     "--out", str(tmp_path / "m.json")]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["train", "--task", "nope"])
    assert exc.value.code == 2


def test_convergence_failure_exit_code(tmp_path, one_thread, monkeypatch):
    from structboost import boosting
    from structboost.errors import ConvergenceError

    def fail(*args, **kwargs):
        raise ConvergenceError("stuck", gap=0.5)

    monkeypatch.setattr(boosting, "cutting_plane", fail)
    data = tmp_path / "bin.svm"
    cli.main(["synth", "--task", "binary", "--n", "20", "--out", str(data)])
    assert cli.main(["train", "--task", "binary", "--data", str(data),
                     "--out", str(tmp_path / "m.json")]) == 3


def test_dump_lp_writes_tableaux(tmp_path, one_thread):
    data = tmp_path / "mc.svm"
    cli.main(["synth", "--task", "multiclass", "--n", "30", "--classes", "3",
              "--out", str(data)])
    dump = tmp_path / "lps"
    assert cli.main(["train", "--task", "multiclass", "--data", str(data), "--iters", "3",
                     "--c", "20",
                     "--out", str(tmp_path / "m.json"), "--dump-lp", str(dump)]) == 0
    files = sorted(dump.iterdir())
    assert files and files[0].read_text().startswith("# lp vars=")


def test_bad_thread_env(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "zero")
    data = tmp_path / "bin.svm"
    cli.main(["synth", "--task", "binary", "--n", "20", "--out", str(data)])
    assert cli.main(["train", "--task", "binary", "--data", str(data),
                     "--out", str(tmp_path / "m.json")]) == 2


def test_crf_predict_output(tmp_path, one_thread, capsys):
    seg = tmp_path / "seg.json"
    cli.main(["synth", "--task", "crf", "--count", "2", "--width", "3", "--height", "3",
              "--out", str(seg)])
    model = tmp_path / "m.json"
    assert cli.main(["train", "--task", "crf", "--data", str(seg), "--iters", "3",
                     "--out", str(model)]) == 0
    capsys.readouterr()
    assert cli.main(["predict", "--model", str(model), "--data", str(seg)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2 and all(len(line.split()) == 9 for line in lines)
    assert sio.load_model(model).task.kind == "crf"
