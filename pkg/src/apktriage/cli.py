"""Command-line interface.

Subcommands: train, evaluate, grid, scan, extract, importance. Exit codes
are 0 (success), 1 (any error, including bad flags), and 3 (scan only: all
files parsed and at least one verdict is MALICIOUS; parse errors take
precedence and exit 1). Every file output is written atomically via a
temp-file rename, and identical flags plus an identical seed reproduce each
output byte for byte.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .core import Label
from .data import DEFAULT_LABEL_COLUMN, load_csv, split_70_30
from .errors import TriageError
from .eval import cross_validate, evaluate_on, feature_importance, grid_search
from .models import ClassifierSpec, KINDS, RfParams, default_spec, train
from .models.serialize import load_model, save_model, write_atomic
from .apkparse import extract_permissions, vectorize
from .models import predict
from . import report

DEFAULT_GRID = tuple(RfParams(n_estimators=n, max_depth=md)
                     for n in (100, 120, 140) for md in (18, 22, 26))


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this tool's contract is 0/1/3
    def error(self, message):
        self.exit(1, "%s: error: %s\n" % (self.prog, message))


def _spec_from_args(args) -> ClassifierSpec:
    overrides = {}
    if args.kind == "rf":
        if args.n_estimators is not None:
            overrides["n_estimators"] = args.n_estimators
        if args.max_depth is not None:
            overrides["max_depth"] = args.max_depth
    elif args.kind == "svm":
        if getattr(args, "lambda_reg", None) is not None:
            overrides["lambda_reg"] = args.lambda_reg
    elif args.kind == "lda":
        if args.shrinkage is not None:
            overrides["shrinkage"] = args.shrinkage
    elif args.kind == "gbdt":
        if args.rounds is not None:
            overrides["n_rounds"] = args.rounds
        if args.learning_rate is not None:
            overrides["learning_rate"] = args.learning_rate
        if args.max_leaves is not None:
            overrides["max_leaves"] = args.max_leaves
    return default_spec(args.kind, args.seed, **overrides)


def _add_data_flags(p):
    p.add_argument("--data", required=True, help="binary permission CSV")
    p.add_argument("--label-col", default=DEFAULT_LABEL_COLUMN,
                   help="label column name (default %(default)s)")


def _add_hyper_flags(p):
    p.add_argument("--kind", choices=KINDS, default="rf",
                   help="classifier kind (default %(default)s)")
    p.add_argument("--n-estimators", type=int, help="rf: number of trees")
    p.add_argument("--max-depth", type=int, help="rf: maximum tree depth")
    p.add_argument("--lambda", dest="lambda_reg", type=float,
                   help="svm: regularization strength")
    p.add_argument("--shrinkage", type=float, help="lda: covariance shrinkage")
    p.add_argument("--rounds", type=int, help="gbdt: boosting rounds")
    p.add_argument("--learning-rate", type=float, help="gbdt: shrinkage per round")
    p.add_argument("--max-leaves", type=int, help="gbdt: leaves per tree")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="apktriage",
                     description="Permission-based Android malware triage")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a classifier on the 70% split")
    _add_data_flags(p)
    _add_hyper_flags(p)
    p.add_argument("--model", required=True, help="output model path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="directory for the summary")

    p = sub.add_parser("evaluate", help="held-out and cross-validated metrics")
    _add_data_flags(p)
    p.add_argument("--model", required=True, help="trained model path")
    p.add_argument("--seed", type=int, default=0,
                   help="seed that produced the train/test split")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--mode", choices=("holdout", "cv", "both"), default="both")
    p.add_argument("--out", default=".", help="directory for metrics.txt and confusion.svg")

    p = sub.add_parser("grid", help="rf hyperparameter grid search by CV accuracy")
    _add_data_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--out", default=".", help="directory for grid.txt")

    p = sub.add_parser("scan", help="classify APK files with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("apks", nargs="+", metavar="APK")

    p = sub.add_parser("extract", help="print an APK's permissions, sorted")
    p.add_argument("apk", metavar="APK")

    p = sub.add_parser("importance", help="top-10 feature importance figure")
    p.add_argument("--model", required=True)
    p.add_argument("--out", default=".", help="directory for importance.svg and ranking.txt")
    return parser


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_train(args) -> int:
    started = time.monotonic()
    ds = load_csv(args.data, args.label_col)
    spec = _spec_from_args(args)
    train_idx, test_idx = split_70_30(ds, args.seed)
    model = train(spec, ds, train_idx)
    save_model(model, args.model)
    cm, mets = evaluate_on(model, ds, train_idx)
    params = " ".join("%s=%s" % (k, v) for k, v in vars(spec.params).items())
    summary = "\n".join([
        "trained %s (seed %d)" % (spec.kind, spec.seed),
        "params %s" % params,
        "dataset %d rows (%d benign, %d malicious)" % (len(ds), *ds.class_counts()),
        "split train=%d test=%d" % (len(train_idx), len(test_idx)),
        "training accuracy %.4f" % mets.accuracy,
        "model %s" % args.model,
    ]) + "\n"
    write_atomic(_outdir(args) / "train_summary.txt", summary)
    print(summary, end="")
    # wall time goes to stderr only: files must be identical across reruns
    print("wall time %.2fs" % (time.monotonic() - started), file=sys.stderr)
    return 0


def cmd_evaluate(args) -> int:
    ds = load_csv(args.data, args.label_col)
    model = load_model(args.model)
    if model.schema != ds.schema:
        raise TriageError("model schema does not match the CSV columns")
    sections = []
    svg_cm = None
    if args.mode in ("holdout", "both"):
        _, test_idx = split_70_30(ds, args.seed)
        cm, mets = evaluate_on(model, ds, test_idx)
        sections.append(report.holdout_report(model.spec.kind, cm, mets))
        svg_cm = cm
    if args.mode in ("cv", "both"):
        cv = cross_validate(model.spec, ds, args.folds, args.seed)
        sections.append(report.cv_report_text(cv))
        if svg_cm is None:
            svg_cm = cv.pooled_cm
    out = _outdir(args)
    text = "\n".join(sections)
    write_atomic(out / "metrics.txt", text)
    write_atomic(out / "confusion.svg", report.svg_confusion(svg_cm))
    print(text, end="")
    return 0


def cmd_grid(args) -> int:
    ds = load_csv(args.data, args.label_col)
    result = grid_search("rf", DEFAULT_GRID, ds, args.folds, args.seed)
    text = report.grid_report_text(result)
    write_atomic(_outdir(args) / "grid.txt", text)
    print(text, end="")
    return 0


def cmd_scan(args) -> int:
    model = load_model(args.model)
    any_malicious = False
    any_error = False
    for path in args.apks:
        try:
            perms = extract_permissions(Path(path).read_bytes())
            bits, unknown = vectorize(perms, model.schema)
            label, score = predict(model, bits)
        except (TriageError, OSError) as exc:
            print("ERROR %s: %s" % (path, exc))
            any_error = True
            continue
        verdict = "MALICIOUS" if label is Label.MALICIOUS else "BENIGN"
        any_malicious = any_malicious or label is Label.MALICIOUS
        line = "%s score=%.4f %s" % (verdict, score, path)
        if unknown:
            line += " (%d unknown: %s)" % (len(unknown), ", ".join(unknown))
        print(line)
    if any_error:
        return 1
    return 3 if any_malicious else 0


def cmd_extract(args) -> int:
    perms = extract_permissions(Path(args.apk).read_bytes())
    for name in sorted(perms):
        print(name)
    return 0


def cmd_importance(args) -> int:
    model = load_model(args.model)
    scores = feature_importance(model)
    out = _outdir(args)
    write_atomic(out / "importance.svg", report.svg_importance(model.schema.names, scores))
    write_atomic(out / "ranking.txt", report.ranking_text(model.schema.names, scores))
    for name, score in report.top_features(model.schema.names, scores):
        print("%s %.6f" % (name, score))
    return 0


_COMMANDS = {
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "grid": cmd_grid,
    "scan": cmd_scan,
    "extract": cmd_extract,
    "importance": cmd_importance,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (TriageError, OSError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
