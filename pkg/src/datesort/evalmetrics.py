"""Confusion matrices, one-vs-rest rates, ROC/PR curves and evaluation reports.

Zero-denominator rates are reported as 0 rather than NaN.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def confusion(y_true, y_pred, n_classes: int) -> np.ndarray:
    """Counts with rows = true class, columns = predicted class."""
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if y_true.shape != y_pred.shape:
        raise ValueError("label lists differ in length")
    if y_true.size == 0:
        raise ValueError("no samples")
    if min(y_true.min(), y_pred.min()) < 0 or max(y_true.max(), y_pred.max()) >= n_classes:
        raise ValueError(f"label out of range for {n_classes} classes")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def _ratio(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0)


def class_metrics(cm: np.ndarray) -> dict:
    """One-vs-rest precision, recall, F1 and specificity per class.

    Returns per-class arrays plus ``macro`` (unweighted class mean) and
    ``micro`` (pooled counts) aggregates and overall ``accuracy``.
    """
    cm = np.asarray(cm)
    total = cm.sum()
    if total == 0:
        raise ValueError("no samples")
    tp = np.diag(cm).astype(float)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    tn = total - tp - fp - fn
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    f1 = _ratio(2 * precision * recall, precision + recall)
    specificity = _ratio(tn, tn + fp)
    per_class = {"precision": precision, "recall": recall, "f1": f1, "specificity": specificity}
    micro_p = float(_ratio(tp.sum(), tp.sum() + fp.sum()))
    micro_r = float(_ratio(tp.sum(), tp.sum() + fn.sum()))
    return {
        "accuracy": float(np.trace(cm) / total),
        "per_class": per_class,
        "macro": {k: float(v.mean()) for k, v in per_class.items()},
        "micro": {
            "precision": micro_p,
            "recall": micro_r,
            "f1": float(_ratio(2 * micro_p * micro_r, micro_p + micro_r)),
            "specificity": float(_ratio(tn.sum(), tn.sum() + fp.sum())),
        },
        "counts": {"tp": tp.astype(int), "fp": fp.astype(int), "fn": fn.astype(int), "tn": tn.astype(int)},
    }


def _sweep(scores, labels):
    """Cumulative TP/FP counts after each distinct threshold, highest first."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(bool)
    order = np.argsort(-scores, kind="mergesort")
    s = scores[order]
    y = labels[order]
    # last index of each run of equal scores
    ends = np.nonzero(np.diff(s) != 0)[0]
    ends = np.append(ends, len(s) - 1)
    tp = np.cumsum(y)[ends]
    fp = np.cumsum(~y)[ends]
    return s[ends], tp, fp, int(labels.sum()), int((~labels).sum())


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray    # one per point after the (0, 0) origin
    auc: float


@dataclass
class PrCurve:
    recall: np.ndarray
    precision: np.ndarray
    thresholds: np.ndarray


def roc_curve(scores, labels) -> RocCurve:
    """ROC points from (0, 0) to (1, 1), one step per distinct score."""
    thr, tp, fp, n_pos, n_neg = _sweep(scores, labels)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined: labels contain a single class")
    fpr = np.concatenate([[0.0], fp / n_neg])
    tpr = np.concatenate([[0.0], tp / n_pos])
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(fpr, tpr, thr, auc)


def pr_curve(scores, labels) -> PrCurve:
    """(recall, precision) after each distinct threshold; ends at recall 1."""
    thr, tp, fp, n_pos, _ = _sweep(scores, labels)
    if n_pos == 0:
        raise ValueError("PR curve needs at least one positive label")
    return PrCurve(tp / n_pos, tp / (tp + fp), thr)


@dataclass
class MetricsReport:
    task: str
    class_names: list[str]
    confusion: np.ndarray
    metrics: dict
    roc: dict[str, RocCurve] = field(default_factory=dict)
    pr: dict[str, PrCurve] = field(default_factory=dict)
    micro_auc: float = float("nan")

    @property
    def accuracy(self) -> float:
        return self.metrics["accuracy"]

    @property
    def auc(self) -> dict[str, float]:
        return {k: c.auc for k, c in self.roc.items()}

    @property
    def macro_auc(self) -> float:
        return float(np.mean(list(self.auc.values()))) if self.roc else float("nan")

    def to_dict(self) -> dict:
        def plain(x):
            if isinstance(x, dict):
                return {k: plain(v) for k, v in x.items()}
            if isinstance(x, np.ndarray):
                return x.tolist()
            return x
        return {
            "task": self.task,
            "classes": self.class_names,
            "confusion": self.confusion.tolist(),
            "total": int(self.confusion.sum()),
            "accuracy": self.accuracy,
            "per_class": plain(self.metrics["per_class"]),
            "macro": self.metrics["macro"],
            "micro": self.metrics["micro"],
            "auc": self.auc,
            "macro_auc": self.macro_auc,
            "micro_auc": self.micro_auc,
            "roc": {k: {"fpr": c.fpr.tolist(), "tpr": c.tpr.tolist()} for k, c in self.roc.items()},
            "pr": {k: {"recall": c.recall.tolist(), "precision": c.precision.tolist()} for k, c in self.pr.items()},
        }


def task_report(task, class_names, y_true, y_pred, scores) -> MetricsReport:
    """Metrics plus one-vs-rest curves; ``scores`` has one column per class.

    Classes absent from ``y_true`` (or covering all of it) get no curve.
    The micro AUC pools every (sample, class) one-vs-rest score.
    """
    y_true = np.asarray(y_true, dtype=int)
    cm = confusion(y_true, y_pred, len(class_names))
    rep = MetricsReport(task, list(class_names), cm, class_metrics(cm))
    for c, name in enumerate(class_names):
        pos = y_true == c
        if pos.any() and not pos.all():
            rep.roc[name] = roc_curve(scores[:, c], pos)
            rep.pr[name] = pr_curve(scores[:, c], pos)
    onehot = y_true[:, None] == np.arange(len(class_names))[None, :]
    if len(class_names) > 2 and onehot.any() and not onehot.all():
        rep.micro_auc = roc_curve(np.asarray(scores).ravel(), onehot.ravel()).auc
    return rep


@dataclass
class EvaluationReport:
    variety: MetricsReport
    spoilage: MetricsReport
    shelf_life_mae: float
    n_samples: int

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "variety": self.variety.to_dict(),
            "spoilage": self.spoilage.to_dict(),
            "shelf_life_mae_days": self.shelf_life_mae,
        }

    def summary_rows(self) -> list[tuple[str, float, float, float]]:
        """Headline table: (metric, variety macro, variety micro, spoilage binary)."""
        v, s = self.variety, self.spoilage
        spoiled = {k: float(v_[1]) for k, v_ in s.metrics["per_class"].items()}
        rows = [("Accuracy", v.accuracy, v.accuracy, s.accuracy)]
        for label, key in (("Precision", "precision"), ("Recall", "recall"),
                           ("F1-Score", "f1"), ("Specificity", "specificity")):
            rows.append((label, v.metrics["macro"][key], v.metrics["micro"][key], spoiled[key]))
        spoil_auc = s.auc.get("spoiled", float("nan"))
        rows.append(("AUC-ROC", v.macro_auc, v.micro_auc, spoil_auc))
        return rows

    def summary_text(self) -> str:
        lines = [f"{'Metric':<14}{'variety-macro':>15}{'variety-micro':>15}{'spoilage':>12}"]
        for name, a, b, c in self.summary_rows():
            lines.append(f"{name:<14}{a:>15.4f}{b:>15.4f}{c:>12.4f}")
        lines.append(f"{'Shelf-life MAE':<14}{self.shelf_life_mae:>15.2f} days")
        return "\n".join(lines) + "\n"


def evaluate(model, data, threshold: float = 0.5) -> EvaluationReport:
    """Score a prepared split (``TrainData``) with ``model``."""
    from .neuralmodel import SHELF_SCALE, forward
    from .synthcrop import Variety

    if len(data) == 0:
        raise ValueError("no samples")
    out = forward(model, data.images, data.features)
    lab = data.labels
    variety = task_report("variety", [v.name for v in Variety], lab.variety,
                          out.variety_prob.argmax(axis=1), out.variety_prob)
    sp = out.spoil_prob
    spoil_scores = np.stack([1.0 - sp, sp], axis=1)
    spoilage = task_report("spoilage", ["edible", "spoiled"], lab.spoiled.astype(int),
                           (sp >= threshold).astype(int), spoil_scores)
    days = np.rint(np.clip(out.shelf_days, 0.0, SHELF_SCALE))
    mae = float(np.abs(days - lab.shelf_days).mean())
    return EvaluationReport(variety, spoilage, mae, len(data))


def write_curve_csv(path, xs, ys, header) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for x, y in zip(xs, ys):
            w.writerow([repr(float(x)), repr(float(y))])


def write_confusion_csv(path, cm, class_names) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["true\\pred", *class_names])
        for name, row in zip(class_names, cm):
            w.writerow([name, *(int(v) for v in row)])


def write_report_files(report: EvaluationReport, out_dir) -> list[Path]:
    """report.json, confusion CSVs, per-class ROC/PR CSVs and summary.txt."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    p = out / "report.json"
    p.write_text(json.dumps(report.to_dict(), indent=1) + "\n")
    written.append(p)
    for rep, fname in ((report.variety, "confusion.csv"), (report.spoilage, "confusion_spoilage.csv")):
        q = out / fname
        write_confusion_csv(q, rep.confusion, rep.class_names)
        written.append(q)
    for prefix, rep in (("", report.variety), ("spoilage_", report.spoilage)):
        for name, c in rep.roc.items():
            q = out / f"{prefix}roc_{name}.csv"
            write_curve_csv(q, c.fpr, c.tpr, ["fpr", "tpr"])
            written.append(q)
        for name, c in rep.pr.items():
            q = out / f"{prefix}pr_{name}.csv"
            write_curve_csv(q, c.recall, c.precision, ["recall", "precision"])
            written.append(q)
    q = out / "summary.txt"
    q.write_text(report.summary_text())
    written.append(q)
    return written
