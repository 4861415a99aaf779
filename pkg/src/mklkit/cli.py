"""Command-line entry point: ``mklkit <command> ...``."""
import argparse
import logging
import os
import sys

import numpy as np

from . import io
from .core import Dataset
from .experiments import (MODES, benchmark, compare_baselines, make_gaussians, modes_agree,
                          split_indices)
from .generators import lazy_list
from .kernels import compute_list, compute_test_list, parse_specs
from .metrics import (alignment, centered_alignment, margin, radius, spectral_ratio)
from .mkl import average_mkl_fit, easymkl_fit, gram_fit, predict

log = logging.getLogger("mklkit")

METRICS = ("margin", "radius", "spectral-ratio", "alignment", "centered-alignment")


class CLIError(Exception):
    pass


def _load(path, fmt, expected_dim=None):
    try:
        return io.load_dataset(path, fmt, expected_dim)
    except OSError as e:
        raise CLIError("cannot read %s: %s" % (path, e.strerror or e)) from None


def _specs(text, data):
    specs = parse_specs(text)
    for s in specs:
        if s.data_kind == "string" and data.kind != "string":
            raise CLIError("kernel %s needs string data (--format strings)" % s)
        if s.data_kind != "string" and data.kind == "string":
            raise CLIError("kernel %s cannot be applied to string data" % s)
        if s.data_kind == "binary" and data.kind != "binary":
            raise CLIError("kernel %s needs binary {0,1} features" % s)
    return specs


def _fmt(v):
    return repr(float(v))


# ---------------------------------------------------------------- train

def run_train(args):
    data = _load(args.data, args.format)
    if data.y is None:
        raise CLIError("training data has no labels")
    specs = _specs(args.kernels, data)
    split = None
    if args.split is not None:
        tr, _ = split_indices(len(data), args.split, args.seed)
        data = data.subset(tr)
        split = {"fraction": args.split, "seed": args.seed}
    if args.lazy:
        KL = lazy_list(data.X, specs, normalize=args.normalize)
    else:
        KL = compute_list(data, specs, normalize=args.normalize)
    if args.algo == "average":
        model = average_mkl_fit(KL, data.y, lam=args.lam, tol=args.tol, max_iter=args.max_iter)
    elif args.algo == "easymkl":
        model = easymkl_fit(KL, data.y, lam=args.lam, tol=args.tol, max_iter=args.max_iter)
    else:
        model = gram_fit(KL, data.y, max_iter=args.gram_iter, step_size=args.step_size,
                         tol=args.gram_tol, lam=args.lam, inner_tol=args.tol,
                         inner_max_iter=args.max_iter)
    model.hyperparameters["normalize"] = bool(args.normalize)
    model.hyperparameters["seed"] = args.seed
    extra = {"split": split, "data_format": args.format}
    io.save_model(args.out, model, None if args.no_embed else data, extra)
    if args.trace:
        with open(args.trace, "w") as f:
            f.write(io.format_trace(model.trace))
    print("eta\t" + "\t".join(_fmt(e) for e in model.eta))
    print("objective\t" + _fmt(model.objective))
    return 0


# ---------------------------------------------------------------- predict

def _test_kernels(model, doc, train, test):
    specs = model.specs
    if specs is None:
        raise CLIError("model was trained on precomputed kernels; cannot rebuild them")
    normalize = bool(model.hyperparameters.get("normalize", False))
    return compute_test_list(train, test, specs, normalize=normalize)


def run_predict(args):
    if not os.path.exists(args.model):
        raise CLIError("model file %s does not exist" % args.model)
    model, train, doc = io.load_model(args.model)
    fmt = doc.get("data_format", "libsvm")
    if train is None:
        if not args.train_data:
            raise CLIError("model has no embedded training data; pass --train-data")
        train = _load(args.train_data, fmt)
    if train.kind != "string":
        test = _load(args.data, fmt, expected_dim=train.X.shape[1])
        if test.kind == "real" and train.kind == "binary":
            test = Dataset(test.X, test.y, "real")
    else:
        test = _load(args.data, fmt)
    if len(train) != len(model.gamma):
        raise CLIError("training data has %d examples, model expects %d"
                       % (len(train), len(model.gamma)))
    KLte = _test_kernels(model, doc, train, test)
    scores, labels = predict(model, KLte)
    text = io.format_predictions(scores, labels)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    if test.y is not None and len(test.y):
        print("accuracy\t%s" % _fmt(np.mean(labels == test.y)),
              file=sys.stderr if not args.out else sys.stdout)
    return 0


# ---------------------------------------------------------------- eval-kernel

def _single_kernel(text, data, normalize):
    specs = _specs(text, data)
    if len(specs) != 1:
        raise CLIError("eval-kernel takes exactly one kernel per spec, got %d" % len(specs))
    return compute_list(data, specs, normalize=normalize)[0]


def run_eval_kernel(args):
    data = _load(args.data, args.format)
    wanted = [m.strip() for m in args.metrics.split(",") if m.strip()]
    for m in wanted:
        if m not in METRICS:
            raise CLIError("unknown metric %r (choose from %s)" % (m, ", ".join(METRICS)))
    K = _single_kernel(args.kernel, data, args.normalize)
    K2 = None
    if any(m.endswith("alignment") for m in wanted):
        if not args.kernel2:
            raise CLIError("alignment metrics need a second kernel (--kernel2)")
        K2 = _single_kernel(args.kernel2, data, args.normalize)
    for m in wanted:
        if m == "margin":
            if data.y is None:
                raise CLIError("margin needs labeled data")
            print("margin\t" + _fmt(margin(K, data.y, tol=args.tol).margin))
        elif m == "radius":
            print("radius\t" + _fmt(radius(K, tol=args.tol).radius))
        elif m == "spectral-ratio":
            print("spectral-ratio-raw\t" + _fmt(spectral_ratio(K, norm=False)))
            if len(K) >= 2:
                print("spectral-ratio\t" + _fmt(spectral_ratio(K, norm=True)))
        elif m == "alignment":
            print("alignment\t" + _fmt(alignment(K, K2)))
        else:
            print("centered-alignment\t" + _fmt(centered_alignment(K, K2)))
    return 0


# ---------------------------------------------------------------- benchmark

_COLUMNS = ("dataset", "n", "d", "P", "mode", "status", "seconds", "peak_bytes",
            "peak_mb", "accuracy", "rss_max_mb")


def _row_values(r):
    return [r.dataset, str(r.n), str(r.d), str(r.P), r.mode, r.status,
            "%.3f" % r.seconds, str(r.peak_bytes), "%.1f" % (r.peak_bytes / 2 ** 20),
            "%.4f" % r.accuracy, "%.1f" % r.rss_max_mb]


def run_benchmark(args):
    if args.data:
        data = _load(args.data, args.format)
        name = os.path.basename(args.data)
    else:
        data = make_gaussians(args.n, args.d, args.seed, args.margin)
        name = "gaussians-n%d-d%d" % (args.n, args.d)
    if data.y is None:
        raise CLIError("benchmark data needs labels")
    specs = _specs(args.kernels, data)
    modes = args.modes.split(",") if args.modes else MODES
    for m in modes:
        if m not in MODES:
            raise CLIError("unknown mode %r" % m)
    kwargs = {"lam": args.lam} if args.algo != "gram" else {}
    rows = benchmark(data, specs, args.algo, modes, name, args.normalize, **kwargs)
    table = [list(_COLUMNS)] + [_row_values(r) for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(_COLUMNS))]
    for row in table:
        print("  ".join(v.rjust(w) for v, w in zip(row, widths)))
    ok = [r for r in rows if r.status == "ok"]
    if len(ok) >= 2 and ok[0].mode == "list":
        for r in ok[1:]:
            if r.peak_bytes:
                print("peak ratio list/%s\t%.2f" % (r.mode, ok[0].peak_bytes / r.peak_bytes))
    if args.out:
        with open(args.out, "w") as f:
            f.write("\t".join(_COLUMNS) + "\n")
            for r in rows:
                f.write("\t".join(_row_values(r)) + "\n")
    if not modes_agree(rows):
        print("error: fitted weights differ across modes", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------- datagen / compare

def run_datagen(args):
    data = make_gaussians(args.n, args.d, args.seed, args.margin, binary=args.binary)
    with open(args.out, "w") as f:
        f.write(io.format_libsvm(data))
    return 0


def run_compare(args):
    data = _load(args.data, args.format)
    if data.y is None:
        raise CLIError("comparison needs labeled data")
    specs = _specs(args.kernels, data)
    if args.test_data:
        train = data
        test = _load(args.test_data, args.format,
                     None if data.kind == "string" else data.X.shape[1])
    else:
        tr, te = split_indices(len(data), args.split, args.seed)
        train, test = data.subset(tr), data.subset(te)
    for name, acc in compare_baselines(train, test, specs, args.lam, args.normalize):
        print("%s\t%s" % (name, _fmt(acc)))
    return 0


# ---------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="mklkit", description="Multiple kernel learning toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def data_args(sp, required=True):
        sp.add_argument("--data", required=required)
        sp.add_argument("--format", choices=("libsvm", "strings"), default="libsvm")

    t = sub.add_parser("train", help="fit an MKL model and write it to a file")
    data_args(t)
    t.add_argument("--kernels", required=True, help="e.g. hpk:1-5 or mck:1-3,linear")
    t.add_argument("--algo", choices=("average", "easymkl", "gram"), default="easymkl")
    t.add_argument("--lam", type=float, default=0.1)
    t.add_argument("--normalize", action="store_true")
    t.add_argument("--split", type=float, help="train on this fraction of the data")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--tol", type=float, default=1e-7)
    t.add_argument("--max-iter", type=int, default=20000)
    t.add_argument("--gram-iter", type=int, default=1000)
    t.add_argument("--gram-tol", type=float, default=1e-6)
    t.add_argument("--step-size", type=float, default=1.0)
    t.add_argument("--lazy", action="store_true", help="compute kernels with generators")
    t.add_argument("--no-embed", action="store_true", help="do not store training data")
    t.add_argument("--trace", help="write per-iteration weights and objective here")
    t.add_argument("--out", required=True)
    t.set_defaults(func=run_train)

    pr = sub.add_parser("predict", help="score a data file with a trained model")
    pr.add_argument("--model", required=True)
    pr.add_argument("--data", required=True)
    pr.add_argument("--train-data")
    pr.add_argument("--out")
    pr.set_defaults(func=run_predict)

    e = sub.add_parser("eval-kernel", help="print kernel quality metrics")
    data_args(e)
    e.add_argument("--kernel", required=True)
    e.add_argument("--kernel2")
    e.add_argument("--metrics", default="margin,radius,spectral-ratio")
    e.add_argument("--normalize", action="store_true")
    e.add_argument("--tol", type=float, default=1e-7)
    e.set_defaults(func=run_eval_kernel)

    b = sub.add_parser("benchmark", help="time and memory of list vs generators")
    data_args(b, required=False)
    b.add_argument("--n", type=int, default=1500)
    b.add_argument("--d", type=int, default=50)
    b.add_argument("--margin", type=float, default=2.0)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--kernels", default="hpk:1-20")
    b.add_argument("--algo", choices=("average", "easymkl", "gram"), default="easymkl")
    b.add_argument("--lam", type=float, default=0.1)
    b.add_argument("--normalize", action="store_true")
    b.add_argument("--modes", help="comma-separated subset of " + ",".join(MODES))
    b.add_argument("--out")
    b.set_defaults(func=run_benchmark)

    g = sub.add_parser("datagen", help="write a synthetic two-Gaussian libsvm file")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, default=10)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--margin", type=float, default=2.0)
    g.add_argument("--binary", action="store_true")
    g.add_argument("--out", required=True)
    g.set_defaults(func=run_datagen)

    c = sub.add_parser("compare", help="base kernels vs AverageMKL vs EasyMKL accuracy")
    data_args(c)
    c.add_argument("--test-data")
    c.add_argument("--kernels", required=True)
    c.add_argument("--split", type=float, default=0.7)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--lam", type=float, default=0.1)
    c.add_argument("--normalize", action="store_true")
    c.set_defaults(func=run_compare)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (CLIError, ValueError, OverflowError) as e:
        print("mklkit: error: %s" % e, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
