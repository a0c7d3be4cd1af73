"""Per-class and macro precision/recall/F1 from a confusion matrix."""
import csv
import io
from dataclasses import dataclass

import numpy as np

from ..exceptions import EmptyDataset


def confusion_matrix(gold, pred, n_classes):
    """``cm[i, j]`` counts samples with gold class ``i`` predicted as ``j``."""
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (np.asarray(gold), np.asarray(pred)), 1)
    return cm


def _safe_div(num, den):
    return np.divide(num, den, out=np.zeros(len(num)), where=den > 0)


@dataclass
class MetricsReport:
    labels: tuple
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    accuracy: float
    group: str = "ALL"
    absent: tuple = ()

    @property
    def macro_precision(self):
        return float(np.mean(self.precision))

    @property
    def macro_recall(self):
        return float(np.mean(self.recall))

    @property
    def macro_f1(self):
        return float(np.mean(self.f1))

    @property
    def n(self):
        return int(self.support.sum())

    @classmethod
    def from_confusion(cls, cm, labels, group="ALL"):
        cm = np.asarray(cm)
        if cm.sum() == 0:
            raise EmptyDataset("cannot score an empty dataset")
        tp = np.diag(cm).astype(np.float64)
        predicted = cm.sum(axis=0)
        support = cm.sum(axis=1)
        precision = _safe_div(tp, predicted)
        recall = _safe_div(tp, support)
        f1 = _safe_div(2 * precision * recall, precision + recall)
        absent = tuple(lab for k, lab in enumerate(labels) if support[k] == 0 and predicted[k] == 0)
        return cls(tuple(labels), precision, recall, f1, support,
                   float(tp.sum() / cm.sum()), group, absent)

    def rows(self):
        """CSV rows ``(dialect, class, precision, recall, f1, support)``."""
        out = [(self.group, lab, float(self.precision[k]), float(self.recall[k]),
                float(self.f1[k]), int(self.support[k])) for k, lab in enumerate(self.labels)]
        out.append((self.group, "MACRO", self.macro_precision, self.macro_recall,
                    self.macro_f1, self.n))
        return out


def evaluate_predictions(gold, pred, labels, groups=None):
    """Score integer-coded predictions.

    Returns one ``MetricsReport`` or, when ``groups`` is given, a dict of
    reports keyed by group plus an ``"ALL"`` entry pooling every sample.
    """
    gold = np.asarray(gold)
    pred = np.asarray(pred)
    if gold.size == 0:
        raise EmptyDataset("cannot score an empty dataset")
    K = len(labels)
    overall = MetricsReport.from_confusion(confusion_matrix(gold, pred, K), labels)
    if groups is None:
        return overall
    groups = np.asarray(groups)
    reports = {}
    for g in sorted(set(groups.tolist())):
        sel = groups == g
        reports[g] = MetricsReport.from_confusion(
            confusion_matrix(gold[sel], pred[sel], K), labels, group=g)
    reports["ALL"] = overall
    return reports


def evaluate(model, texts, gold_labels, dialects=None, group_by_dialect=False):
    """Predict ``texts`` with a fitted classifier and score against gold labels."""
    labels = list(model.classes_)
    lookup = {lab: k for k, lab in enumerate(labels)}
    gold = np.array([lookup[g] for g in gold_labels], dtype=np.int64)
    pred = np.argmax(model.predict_proba(texts), axis=1)
    return evaluate_predictions(gold, pred, labels, dialects if group_by_dialect else None)


def _as_list(reports):
    return list(reports.values()) if isinstance(reports, dict) else [reports]


def metrics_csv(reports):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dialect", "class", "precision", "recall", "f1", "support"])
    for rep in _as_list(reports):
        for row in rep.rows():
            w.writerow([*row[:2], f"{row[2]:.6f}", f"{row[3]:.6f}", f"{row[4]:.6f}", row[5]])
    return buf.getvalue()


def format_table(reports, system="BiLSTM"):
    """Text table with one row per group: Metric | System | F1 | Precision | Recall."""
    header = ("Metric", "System", "F1", "Precision", "Recall")
    rows = [(rep.group, system, f"{rep.macro_f1:.3f}", f"{rep.macro_precision:.3f}",
             f"{rep.macro_recall:.3f}") for rep in _as_list(reports)]
    widths = [max(len(str(r[i])) for r in [header, *rows]) for i in range(len(header))]
    lines = [" | ".join(str(c).ljust(w) for c, w in zip(r, widths)) for r in [header, *rows]]
    lines.insert(1, "-+-".join("-" * w for w in widths))
    notes = [f"note: {rep.group}: class(es) {', '.join(rep.absent)} absent from gold and "
             "predictions; scored 0" for rep in _as_list(reports) if rep.absent]
    return "\n".join(lines + notes) + "\n"
