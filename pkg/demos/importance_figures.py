#!/usr/bin/env python3
"""Render the SVG figures: confusion heatmap and top-feature importance.

Trains the forest and the boosted trees on AND-rule synthetic data, where
only two of twenty features matter, and writes confusion_rf.svg,
importance_rf.svg and importance_gbdt.svg into demos/out/. Open them in a
browser; rerunning rewrites identical bytes.
"""

from pathlib import Path

from apktriage.data import rule_and, split_70_30, synth_generate
from apktriage.eval import evaluate_on, feature_importance
from apktriage.models import default_spec, train
from apktriage.models.serialize import write_atomic
from apktriage.report import ranking_text, svg_confusion, svg_importance, top_features

OUT = Path(__file__).resolve().parent / "out"


def main() -> None:
    OUT.mkdir(exist_ok=True)
    ds = synth_generate(1500, 20, rule_and(3, 11), noise=0.02, seed=9)
    tr, te = split_70_30(ds, 9)

    for kind in ("rf", "gbdt"):
        model = train(default_spec(kind, 9), ds, tr)
        cm, mets = evaluate_on(model, ds, te)
        scores = feature_importance(model)
        write_atomic(OUT / ("importance_%s.svg" % kind),
                     svg_importance(ds.schema.names, scores))
        write_atomic(OUT / ("ranking_%s.txt" % kind),
                     ranking_text(ds.schema.names, scores))
        if kind == "rf":
            write_atomic(OUT / "confusion_rf.svg", svg_confusion(cm))
        print("%s: holdout accuracy %.4f, top features:" % (kind, mets.accuracy))
        for name, score in top_features(ds.schema.names, scores, limit=4):
            print("   %-4s %.4f" % (name, score))
    print("\nfigures written to %s" % OUT)


if __name__ == "__main__":
    main()
