"""Command-line entry point: train, predict, eval, bench-auc, synth."""

import argparse
import csv
import logging
import os
import sys

from . import io as sio
from .bench import bench_auc, write_bench_csv
from .boosting import train
from .data import split_dataset
from .errors import InvalidInputError, StructBoostError
from .lp import add_observer, remove_observer
from .metrics import evaluate
from .model import TaskDescriptor, TrainParams
from .synth import crf_grids, gaussian_classes, imbalanced_ranking, taxonomy_data
from .tasks import make_task

THREADS_ENV = "STRUCTBOOST_THREADS"
TASKS = ("binary", "multiclass", "tree", "ranking", "crf")

log = logging.getLogger("structboost")


def thread_count():
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise InvalidInputError(f"{THREADS_ENV} must be a positive integer") from None
    if n < 1:
        raise InvalidInputError(f"{THREADS_ENV} must be a positive integer")
    return n


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def _load_data(kind, path):
    if kind == "crf":
        return sio.load_instances(path)
    return sio.parse_libsvm(path)


def _descriptor(args, data):
    if args.task == "tree":
        if not args.taxonomy:
            raise InvalidInputError("--task tree needs --taxonomy")
        tax = sio.read_taxonomy(args.taxonomy)
        return TaskDescriptor("tree", tax.n_classes, tax.parents, tax.class_nodes,
                              args.loss or "tree")
    if args.task == "multiclass":
        k = int(data.y.max()) if len(data) else 2
        return TaskDescriptor("multiclass", k, loss=args.loss or "zero_one")
    if args.task == "binary":
        return TaskDescriptor("binary", 2, loss="zero_one")
    if args.task == "ranking":
        return TaskDescriptor("ranking", loss="pair")
    return TaskDescriptor("crf", loss="hamming")


def _params(args, **over):
    fields = dict(C=args.c, max_iters=args.iters, eps_cg=args.eps_cg, eps_cp=args.eps_cp,
                  seed=args.seed, solver=args.solver.replace("-", "_"), weak=args.weak,
                  threads=thread_count())
    fields.update(over)
    return TrainParams(**fields)


class _LpDumper:
    def __init__(self, directory):
        os.makedirs(directory, exist_ok=True)
        self.directory = directory
        self.count = 0

    def __call__(self, lp, sol):
        self.count += 1
        name = os.path.join(self.directory, f"lp_{self.count:05d}.txt")
        with open(name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(lp.dump())
            fh.write(f"# status {sol.status} objective {sol.objective_value!r}\n")


def cmd_train(args):
    data = _load_data(args.task, args.data)
    desc = _descriptor(args, data)
    task = make_task(desc, data)
    dumper = _LpDumper(args.dump_lp) if args.dump_lp else None
    if dumper:
        add_observer(dumper)
    try:
        model, trace = train(task, _params(args))
    finally:
        if dumper:
            remove_observer(dumper)
    # thread count is an execution detail and must not leak into the model bytes
    model.metadata["params"].pop("threads", None)
    sio.save_model(model, args.out)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8", newline="\n") as fh:
            trace.to_csv(fh)
    log.info("trained %d columns, stop reason %s", len(model), trace.stop_reason)


def cmd_predict(args):
    model = sio.load_model(args.model)
    data = _load_data(model.task.kind, args.data)
    task = make_task(model.task, data)
    pred = task.predict(model.weights, model.columns)
    fh, close = _open_out(args.out)
    try:
        for p in pred:
            if model.task.kind == "crf":
                fh.write(" ".join(str(int(v)) for v in p) + "\n")
            else:
                fh.write(sio.fmt(p) + "\n")
    finally:
        if close:
            fh.close()


def cmd_eval(args):
    model = sio.load_model(args.model)
    data = _load_data(model.task.kind, args.data)
    record = evaluate(model, data)
    fh, close = _open_out(args.out)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("metric", "value"))
        for key, value in record.items():
            writer.writerow((key, sio.fmt(value)))
    finally:
        if close:
            fh.close()


def cmd_bench_auc(args):
    data = sio.parse_libsvm(args.data)
    if args.test:
        train_data, test_data = data, sio.parse_libsvm(args.test, data.X.shape[1])
    else:
        train_data, test_data = split_dataset(data, (0.5, 0.5), args.seed)
    try:
        grid = [float(v) for v in args.c_grid.split(",") if v.strip()]
    except ValueError:
        raise InvalidInputError(f"bad --c-grid {args.c_grid!r}") from None
    if not grid:
        raise InvalidInputError("--c-grid is empty")
    rows = bench_auc(train_data, test_data, grid, _params(args, C=grid[0]),
                     trace_dir=args.trace_dir)
    fh, close = _open_out(args.out)
    try:
        write_bench_csv(rows, fh)
    finally:
        if close:
            fh.close()


def cmd_synth(args):
    if args.task == "crf":
        sio.save_instances(crf_grids(args.count, args.width, args.height, args.noise,
                                     args.seed), args.out)
        return
    if args.task == "tree":
        data, tax = taxonomy_data(args.n, args.seed)
        if args.taxonomy_out:
            sio.write_taxonomy(tax, args.taxonomy_out)
    elif args.task == "ranking":
        data = imbalanced_ranking(args.n, args.seed, args.positive_fraction, args.dim)
    else:
        k = 2 if args.task == "binary" else args.classes
        data = gaussian_classes(args.n, k, args.dim, args.seed)
    sio.write_libsvm(data, args.out)


def _training_flags(p, eps_cp):
    p.add_argument("--c", type=float, default=1.0, help="regularisation trade-off C")
    p.add_argument("--iters", type=int, default=200, help="maximum boosting iterations")
    p.add_argument("--eps-cg", type=float, default=1e-5, help="column-generation tolerance")
    p.add_argument("--eps-cp", type=float, default=eps_cp, help="cutting-plane tolerance")
    p.add_argument("--weak", choices=("stump", "perceptron"), default="stump")
    p.add_argument("--solver", choices=("one-slack", "m-slack"), default="one-slack")
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(prog="structboost",
                                     description="Column-generation structured boosting")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model")
    p.add_argument("--task", choices=TASKS, required=True)
    p.add_argument("--data", required=True, help="libsvm file, or seg-instance JSON for crf")
    p.add_argument("--taxonomy", help="taxonomy file for --task tree")
    p.add_argument("--loss", choices=("zero_one", "tree"), help="label loss override")
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--trace", help="per-iteration CSV trace path")
    p.add_argument("--dump-lp", metavar="DIR", help="write every master LP as text")
    _training_flags(p, 0.01)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict labels")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="evaluate a model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench-auc", help="compare 1-slack and m-slack on AUC training")
    p.add_argument("--data", required=True)
    p.add_argument("--test", help="test set; default is a seeded 50/50 split of --data")
    p.add_argument("--c-grid", default="1,10,100", help="comma-separated C values")
    p.add_argument("--trace-dir", help="directory for per-run trace CSVs")
    p.add_argument("--out", default="-")
    _training_flags(p, 0.001)
    p.set_defaults(func=cmd_bench_auc)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--task", choices=TASKS, required=True)
    p.add_argument("--n", type=int, default=200, help="samples (feature tasks)")
    p.add_argument("--dim", type=int, default=5)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--positive-fraction", type=float, default=0.1)
    p.add_argument("--count", type=int, default=20, help="grids (crf)")
    p.add_argument("--width", type=int, default=8)
    p.add_argument("--height", type=int, default=8)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--taxonomy-out", help="taxonomy file written for --task tree")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except StructBoostError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return InvalidInputError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
