"""Deterministic rendering: SVG figures and plain-text result tables.

Everything here is pure string building from already-computed numbers; the
same inputs yield byte-identical output, which the CLI depends on. Metric
percentages use two decimals in the order accuracy / recall / precision.
"""

from __future__ import annotations

import numpy as np

from .eval import ConfusionMatrix, CvReport, GridResult, Metrics

_BLUE = (31, 119, 180)


def _xml_escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


def _heat_fill(count: int, peak: int) -> str:
    # linear white -> blue in the cell count
    frac = 0.0 if peak == 0 else count / peak
    r = round(255 + (_BLUE[0] - 255) * frac)
    g = round(255 + (_BLUE[1] - 255) * frac)
    b = round(255 + (_BLUE[2] - 255) * frac)
    return "rgb(%d,%d,%d)" % (r, g, b)


def svg_confusion(cm: ConfusionMatrix) -> str:
    """2x2 heatmap; actual class on rows, predicted on columns."""
    grid = [[cm.tn, cm.fp],   # actual Benign:    predicted Benign, Malicious
            [cm.fn, cm.tp]]   # actual Malicious: predicted Benign, Malicious
    peak = max(cm.tn, cm.fp, cm.fn, cm.tp)
    cell = 110
    x0, y0 = 150, 70
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="420" height="340" '
        'font-family="sans-serif" font-size="14">',
        '<rect width="420" height="340" fill="white"/>',
        '<text x="%d" y="30" text-anchor="middle" font-size="16">Confusion matrix'
        '</text>' % (x0 + cell),
        '<text x="%d" y="55" text-anchor="middle">Predicted</text>' % (x0 + cell),
        '<text x="20" y="%d" transform="rotate(-90 20 %d)" text-anchor="middle">'
        'Actual</text>' % (y0 + cell, y0 + cell),
    ]
    names = ("Benign", "Malicious")
    for col, name in enumerate(names):
        parts.append('<text x="%d" y="%d" text-anchor="middle">%s</text>'
                     % (x0 + cell * col + cell // 2, y0 - 8, name))
    for row, name in enumerate(names):
        parts.append('<text x="%d" y="%d" text-anchor="end">%s</text>'
                     % (x0 - 10, y0 + cell * row + cell // 2 + 5, name))
    for row in range(2):
        for col in range(2):
            count = grid[row][col]
            x = x0 + cell * col
            y = y0 + cell * row
            parts.append('<rect x="%d" y="%d" width="%d" height="%d" fill="%s" '
                         'stroke="black"/>' % (x, y, cell, cell, _heat_fill(count, peak)))
            dark = peak > 0 and count / peak > 0.6
            parts.append('<text class="count" x="%d" y="%d" text-anchor="middle" '
                         'font-size="20" fill="%s">%d</text>'
                         % (x + cell // 2, y + cell // 2 + 7,
                            "white" if dark else "black", count))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def top_features(names, scores, limit: int = 10) -> list[tuple[str, float]]:
    """Highest-scoring features, ties resolved by schema order."""
    scores = np.asarray(scores, dtype=np.float64)
    order = sorted(range(len(names)), key=lambda i: (-scores[i], i))
    return [(names[i], float(scores[i])) for i in order[:limit]]


def svg_importance(names, scores, limit: int = 10) -> str:
    """Horizontal bar chart of the top features by importance."""
    ranked = [(n, s) for n, s in top_features(names, scores, limit) if s > 0.0]
    row_h = 26
    label_w = 230
    bar_w = 240
    height = 70 + row_h * max(1, len(ranked))
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="560" height="%d" '
        'font-family="sans-serif" font-size="13">' % height,
        '<rect width="560" height="%d" fill="white"/>' % height,
        '<text x="280" y="28" text-anchor="middle" font-size="16">'
        'Top feature importance</text>',
    ]
    if not ranked:
        parts.append('<text class="notice" x="280" y="%d" text-anchor="middle">'
                     'no splits recorded</text>' % (40 + row_h))
    else:
        peak = ranked[0][1]
        for i, (name, score) in enumerate(ranked):
            y = 50 + row_h * i
            width = max(1, round(bar_w * score / peak))
            parts.append('<text x="%d" y="%d" text-anchor="end">%s</text>'
                         % (label_w - 8, y + 14, _xml_escape(name)))
            parts.append('<rect class="bar" x="%d" y="%d" width="%d" height="%d" '
                         'fill="rgb(31,119,180)"/>' % (label_w, y, width, row_h - 8))
            parts.append('<text x="%d" y="%d">%.6f</text>'
                         % (label_w + width + 6, y + 14, score))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def ranking_text(names, scores) -> str:
    """Full importance ranking, one `name score` line per feature."""
    lines = ["%s %.17g" % (name, score)
             for name, score in top_features(names, scores, limit=len(names))]
    return "\n".join(lines) + "\n"


def _metrics_row(tag: str, m: Metrics) -> str:
    line = "%-10s %8.2f %8.2f %8.2f" % (tag, 100.0 * m.accuracy,
                                        100.0 * m.recall, 100.0 * m.precision)
    if m.flags:
        line += "   [" + "; ".join(m.flags) + "]"
    return line


def _table_header() -> str:
    return "%-10s %8s %8s %8s" % ("", "acc%", "rec%", "prec%")


def confusion_text(cm: ConfusionMatrix) -> str:
    return ("confusion  tp=%d tn=%d fp=%d fn=%d (n=%d)"
            % (cm.tp, cm.tn, cm.fp, cm.fn, cm.total))


def holdout_report(kind: str, cm: ConfusionMatrix, m: Metrics) -> str:
    lines = ["held-out 30% evaluation",
             _table_header(),
             _metrics_row(kind, m),
             confusion_text(cm)]
    return "\n".join(lines) + "\n"


def cv_report_text(report: CvReport) -> str:
    lines = ["%d-fold cross-validation (%s)" % (report.k, report.spec.kind),
             _table_header()]
    for i, fold in enumerate(report.folds):
        lines.append(_metrics_row("fold %d" % i, fold.metrics))
    lines.append(_metrics_row("mean", report.mean))
    lines.append(_metrics_row("std", report.std))
    lines.append(confusion_text(report.pooled_cm))
    return "\n".join(lines) + "\n"


def grid_report_text(result: GridResult) -> str:
    lines = ["grid search (%s), scored by mean CV accuracy" % result.kind]
    for i, point in enumerate(result.points):
        mark = " <- best" if i == result.best_index else ""
        fields = " ".join("%s=%s" % (k, v) for k, v in vars(point.params).items())
        lines.append("%s  acc=%.4f%s" % (fields, point.mean_accuracy, mark))
    return "\n".join(lines) + "\n"
